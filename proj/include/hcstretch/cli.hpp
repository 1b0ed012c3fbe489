#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcstretch/cube.hpp"

namespace hcstretch::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kBudget = 3,
  kCheckFailed = 4,
  kIo = 5,
};

struct ResolvedSet {
  CubeSet set{1};
  std::string description;       // canonical form, e.g. "random_half:10:seed7"
  std::optional<SetKind> kind;   // empty for @file
  std::optional<std::uint64_t> seed;
  std::string file_digest;       // hex FNV-1a of the file bytes, @file only
};

// "<kind>:<n>[:<seed>]" (seed as "7" or "seed7") or "@<path>". Sets that
// need a seed and were given none take derive_seed(master, role, 0).
ResolvedSet parse_set_spec(std::string_view spec, std::uint64_t master_seed,
                           std::string_view role);

// Entry point behind the hcstretch executable. Reports go to `out` (or the
// --out file), diagnostics to `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcstretch::cli
