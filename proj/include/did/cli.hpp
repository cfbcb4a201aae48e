#pragma once

#include <string>
#include <vector>

#include "did/pipeline.hpp"

namespace did {

// Exact wire schema consumed by downstream tooling: key order fixed, reals
// printed with six decimal places, bbox as [x0,y0,x1,y1].
std::string proposals_to_json(const PredictionResult& result);
void write_proposals_json(const PredictionResult& result, const std::string& path);

// Entry point behind the `did` binary. args excludes argv[0].
// Returns 0 on success, nonzero with a message on stderr otherwise.
int run_cli(const std::vector<std::string>& args);

} // namespace did
