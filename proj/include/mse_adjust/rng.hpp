#ifndef MSE_ADJUST_RNG_HPP_
#define MSE_ADJUST_RNG_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>

namespace mse_adjust {

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Folds the parts into one 64-bit stream key. Different part lists give
/// unrelated keys, so each (seed, purpose, index...) owns an independent stream.
std::uint64_t derive_stream_key(std::initializer_list<std::uint64_t> parts);

/// Tags separating the purposes a stream key can be derived for.
enum class StreamTag : std::uint64_t {
  kDataset = 0x64617461,    // "data"
  kBootstrap = 0x626f6f74,  // "boot"
  kSelection = 0x73656c63,  // "selc"
};

/// Sequential draws from one Philox stream: the key is fixed, the counter
/// advances by one block per four 32-bit outputs.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t stream_key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1): (k + 0.5) * 2^-53 for a 53-bit k.
  double uniform();
  /// Standard normal by inverse-CDF transform of uniform().
  double normal();
  /// Uniform integer in [0, bound) by multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  Philox4x32::Key key_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

}  // namespace mse_adjust

#endif  // MSE_ADJUST_RNG_HPP_
