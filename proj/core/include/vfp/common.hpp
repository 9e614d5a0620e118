#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vfp {

// Error taxonomy mirrored by the CLI exit codes: config 2, data 3, numeric 4.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to the same double bit pattern.
std::string format_double(double v);

/// Strict double parse of the whole string. Returns false on trailing garbage,
/// empty input, or out-of-range values.
bool try_parse_double(std::string_view s, double& out);

/// Runs f(0..n-1) on up to `threads` workers with static block partitioning.
/// Callers own determinism: f(i) must write only to slot i of preallocated
/// storage. threads<=1 runs inline.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& f);

/// Entity mean with one refinement pass so that sum(x - mean) is at the
/// rounding floor; the within/between identities in the panel module and the
/// orthogonality tolerances downstream rely on this.
double refined_mean(const double* x, std::size_t n);

std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace vfp
