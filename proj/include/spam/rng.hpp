#ifndef SPAM_RNG_HPP
#define SPAM_RNG_HPP

// Counter-based pseudo-randomness (Philox4x32-10) with keyed streams.
//
// Every random quantity in the library is drawn from a stream addressed by
// (seed, purpose, id).  Streams are stateless functions of their address and
// a 64-bit block counter, so per-client or per-round generation can run in
// any order (or in parallel) and still produce bit-identical results.
//
// Stream layout (documented for reproducibility):
//   key     = (lo32(seed), hi32(seed))
//   counter = (lo32(block), hi32(block), id, purpose_tag)
// where `block` starts at 0 and increments once per generated 4x32 block.
//
// N(0,1) transform (fixed for bit-reproducibility): each block of four
// 32-bit words (w0,w1,w2,w3) yields one Box-Muller pair
//   u1 = (((w0 << 32 | w1) >> 11) + 1) * 2^-53   in (0, 1]
//   u2 = (((w2 << 32 | w3) >> 11)    ) * 2^-53   in [0, 1)
//   z0 = sqrt(-2 ln u1) * cos(2 pi u2),  z1 = sqrt(-2 ln u1) * sin(2 pi u2)
// normal() returns z0 then z1, consuming a new block every two calls.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace spam {

struct PhiloxBlock {
  uint32_t v[4];
};

namespace detail {
inline void philox_round(uint32_t c[4], const uint32_t k[2]) {
  constexpr uint64_t M0 = 0xD2511F53u;
  constexpr uint64_t M1 = 0xCD9E8D57u;
  const uint64_t p0 = M0 * c[0];
  const uint64_t p1 = M1 * c[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
  const uint32_t lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
  const uint32_t lo1 = static_cast<uint32_t>(p1);
  const uint32_t y0 = hi1 ^ c[1] ^ k[0];
  const uint32_t y1 = lo1;
  const uint32_t y2 = hi0 ^ c[3] ^ k[1];
  const uint32_t y3 = lo0;
  c[0] = y0;
  c[1] = y1;
  c[2] = y2;
  c[3] = y3;
}
}  // namespace detail

// The 10-round Philox4x32 keyed permutation (Salmon et al., SC'11 layout).
inline PhiloxBlock philox4x32(const uint32_t counter[4], const uint32_t key[2]) {
  constexpr uint32_t W0 = 0x9E3779B9u;
  constexpr uint32_t W1 = 0xBB67AE85u;
  uint32_t c[4] = {counter[0], counter[1], counter[2], counter[3]};
  uint32_t k[2] = {key[0], key[1]};
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += W0;
      k[1] += W1;
    }
    detail::philox_round(c, k);
  }
  return PhiloxBlock{{c[0], c[1], c[2], c[3]}};
}

// Purpose tags keep unrelated draws on disjoint streams.
enum class StreamPurpose : uint32_t {
  design = 1,        // shared design matrix A0
  perturbation = 2,  // per-client heterogeneity factor B0
  targets = 3,       // per-client target vector y
  x0 = 4,            // initial iterate
  warmup = 5,        // estimator warm-up client picks
  cohort = 6,        // per-round cohort sampling (also the spam client pick)
  prox_pick = 7,     // per-round prox-client choice within a cohort
  test = 100,        // scratch streams used only by tests
};

class RandomStream {
 public:
  RandomStream(uint64_t seed, StreamPurpose purpose, uint64_t id) {
    if (id > 0xFFFFFFFFull) throw std::invalid_argument("RandomStream: id exceeds 32 bits");
    key_[0] = static_cast<uint32_t>(seed);
    key_[1] = static_cast<uint32_t>(seed >> 32);
    id_ = static_cast<uint32_t>(id);
    purpose_ = static_cast<uint32_t>(purpose);
  }

  uint32_t next_u32() {
    if (buf_pos_ >= 4) refill();
    return buf_[buf_pos_++];
  }

  // Standard normal via the documented Box-Muller transform.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const uint32_t w0 = next_u32();
    const uint32_t w1 = next_u32();
    const uint32_t w2 = next_u32();
    const uint32_t w3 = next_u32();
    const uint64_t a = (static_cast<uint64_t>(w0) << 32) | w1;
    const uint64_t b = (static_cast<uint64_t>(w2) << 32) | w3;
    const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;        // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n) by rejection; unbiased and deterministic.
  uint64_t uniform_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    if (n > 0xFFFFFFFFull) throw std::invalid_argument("uniform_below: n exceeds 32 bits");
    const uint64_t span = 0x100000000ull;
    const uint64_t limit = span - (span % n);
    for (;;) {
      const uint64_t x = next_u32();
      if (x < limit) return x % n;
    }
  }

 private:
  void refill() {
    const uint32_t ctr[4] = {static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
                             id_, purpose_};
    const PhiloxBlock blk = philox4x32(ctr, key_);
    buf_[0] = blk.v[0];
    buf_[1] = blk.v[1];
    buf_[2] = blk.v[2];
    buf_[3] = blk.v[3];
    buf_pos_ = 0;
    ++block_;
  }

  uint32_t key_[2];
  uint32_t id_ = 0;
  uint32_t purpose_ = 0;
  uint64_t block_ = 0;
  uint32_t buf_[4] = {0, 0, 0, 0};
  int buf_pos_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace spam

#endif  // SPAM_RNG_HPP
