#pragma once

#include <iosfwd>
#include <string>

#include "decon/sampler.hpp"

namespace decon {

enum class DrawFormat { Csv, Binary };

DrawFormat parseDrawFormat(const std::string& name);

/// Text layout: a `# decon-draws v1` line, a `# meta {json}` line, a header of
/// flattened parameter names, then one comma-separated record per snapshot.
/// The binary layout carries the same header lines followed by raw little-endian doubles.
void writeDraws(const PosteriorDraws& draws, std::ostream& out, DrawFormat format);
PosteriorDraws readDraws(std::istream& in);

void saveDraws(const PosteriorDraws& draws, const std::string& path, DrawFormat format);
PosteriorDraws loadDraws(const std::string& path);

/// One line per MH block: block,proposed,accepted,rate.
void writeAcceptance(const PosteriorDraws& draws, std::ostream& out);

}  // namespace decon

namespace decon {

/// Posterior-mean intakes per subject: `subject,<name>...,<name>_plus...`, where the
/// `_plus` columns hold X / P(X) for episodic components and X for regular ones.
void writeIntakes(const PosteriorDraws& draws, std::ostream& out);
struct IntakeTable {
  std::vector<long> subjectIds;
  Eigen::MatrixXd meanX, meanXt;
};
IntakeTable readIntakes(const std::string& path, int dim);

}  // namespace decon
