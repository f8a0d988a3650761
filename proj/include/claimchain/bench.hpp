#pragma once

#include <cstddef>

#include "claimchain/core.hpp"

// Timing and size measurements for the primitive operations, shared by
// the command-line bench command and the acceptance harness.  All
// figures are measured on the current process, wall-clock.

namespace claimchain::bench {

struct ClaimTimings {
  size_t iterations = 0;
  double encode_ms = 0.0;      // mean per claim encode
  double decode_ms = 0.0;      // mean per claim decode
  double cap_encode_ms = 0.0;  // mean per capability encode
  double cap_decode_ms = 0.0;  // mean per capability decode
};

ClaimTimings measure_claim_ops(size_t iterations = 50);

struct TreeStats {
  size_t entries = 0;
  double build_seconds = 0.0;
  double mean_path_nodes = 0.0;
  size_t max_path_nodes = 0;
  size_t max_proof_bytes = 0;  // largest serialized single-entry path
};

// Builds a map of claim-sized entries and probes resolution paths.
TreeStats measure_tree(size_t entries, size_t probes = 200);

struct BlockStats {
  size_t claims_low = 0;
  size_t bytes_low = 0;
  size_t claims_high = 0;
  size_t bytes_high = 0;
};

// Serialized block size at two claim counts; the map lives in the store,
// so the sizes should match.
BlockStats measure_block_size(size_t low = 2, size_t high = 40);

}  // namespace claimchain::bench
