#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class... Args>
std::string strcat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

template <class... Args>
[[noreturn]] inline void fail(Args&&... args) {
  throw Error(strcat(std::forward<Args>(args)...));
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash_bytes(const void* data, std::size_t len,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  // FNV-1a, folded through splitmix for better diffusion of short keys.
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

inline std::uint64_t hash_string(const std::string& s, std::uint64_t seed = 0) {
  return hash_bytes(s.data(), s.size(), 0xcbf29ce484222325ULL ^ seed);
}

// Seeded random stream. Transforms are hand-rolled on top of mt19937_64 so
// that draws are bit-identical across standard libraries (std distributions
// are not pinned by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // [0, 1)
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // unbiased integer in [0, n)
  std::size_t index(std::size_t n) {
    if (n == 0) fail("Rng::index: n must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Knuth's inversion; fine for the small means used here.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    double prod = 1.0;
    int k = 0;
    do {
      ++k;
      prod *= uniform01();
    } while (prod > limit);
    return k - 1;
  }

  Rng fork(std::uint64_t stream) const {
    return Rng(splitmix64(splitmix64(seed_) ^ splitmix64(stream)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

// ---- little-endian binary IO ----

inline void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) fail("truncated input while reading u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void write_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  write_u64(os, v);
}

inline double read_f64(std::istream& is) {
  std::uint64_t v = read_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  std::uint64_t len = read_u64(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) fail("truncated input while reading string");
  return s;
}

// Running FNV-1a over everything written/read; used for file trailers.
class Checksum {
 public:
  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace rsp
