#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lw::cli {

/// 0 success or audit pass, 1 audit failure or size guard, 2 usage, file,
/// parse, validation or integrity errors.
enum Exit { kOk = 0, kFail = 1, kUsage = 2 };

/// Default output directory for `run` when --out is absent.
inline constexpr const char* kOutEnv = "LWORLDS_OUT";

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lw::cli
