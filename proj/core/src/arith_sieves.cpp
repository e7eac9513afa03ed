#include "qmoments/arith_sieves.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <new>
#include <ostream>
#include <string>

#include "qmoments/errors.hpp"

namespace qmoments {
namespace {

constexpr std::array<char, 5> kCacheMagic{'Q', 'M', 'S', 'V', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw InvalidArgument("sieve cache truncated in header");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

void read_exact(std::istream& in, char* dst, std::size_t count, const char* what) {
  if (!in.read(dst, static_cast<std::streamsize>(count))) {
    throw InvalidArgument(std::string("sieve cache truncated in ") + what);
  }
}

}  // namespace

SieveTables SieveTables::build(std::uint64_t limit, std::uint64_t cap) {
  if (limit < 2) throw InvalidArgument("sieve limit must be at least 2");
  if (limit > cap || limit >= (std::uint64_t{1} << 32)) {
    throw ResourceLimit("sieve limit " + std::to_string(limit) + " exceeds cap " +
                        std::to_string(cap));
  }

  SieveTables t;
  t.limit_ = limit;
  try {
    t.mobius_.assign(limit + 1, 0);
    t.spf_.assign(limit + 1, 0);
    t.primes_.reserve(static_cast<std::size_t>(1.26 * limit / std::log(double(limit))) + 16);
  } catch (const std::bad_alloc&) {
    throw ResourceLimit("cannot allocate sieve tables for limit " + std::to_string(limit));
  }

  t.mobius_[1] = 1;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (t.spf_[i] == 0) {
      t.spf_[i] = static_cast<std::uint32_t>(i);
      t.mobius_[i] = -1;
      t.primes_.push_back(static_cast<std::uint32_t>(i));
    }
    const std::uint32_t spf_i = t.spf_[i];
    for (const std::uint32_t p : t.primes_) {
      const std::uint64_t m = i * p;
      if (p > spf_i || m > limit) break;
      t.spf_[m] = p;
      t.mobius_[m] = (p == spf_i) ? std::int8_t{0} : static_cast<std::int8_t>(-t.mobius_[i]);
    }
  }
  t.primes_.shrink_to_fit();
  t.derive_squarefree_bits();
  return t;
}

void SieveTables::derive_squarefree_bits() {
  squarefree_bits_.assign((limit_ + 63) / 64, 0);
  for (std::uint64_t n = 1; n <= limit_; ++n) {
    if (mobius_[n] != 0) squarefree_bits_[(n - 1) >> 6] |= std::uint64_t{1} << ((n - 1) & 63);
  }
}

std::size_t SieveTables::prime_count(std::uint64_t x) const {
  return static_cast<std::size_t>(
      std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
}

void SieveTables::save(std::ostream& out) const {
  out.write(kCacheMagic.data(), kCacheMagic.size());
  write_u64(out, limit_);
  out.write(reinterpret_cast<const char*>(mobius_.data() + 1),
            static_cast<std::streamsize>(limit_));
  const std::uint64_t packed = (limit_ + 7) / 8;
  std::vector<char> bits(packed, 0);
  for (std::uint64_t n = 1; n <= limit_; ++n) {
    if (is_squarefree(n)) bits[(n - 1) / 8] |= static_cast<char>(1U << ((n - 1) % 8));
  }
  out.write(bits.data(), static_cast<std::streamsize>(bits.size()));
  std::vector<char> spf_bytes(4 * (limit_ - 1));
  for (std::uint64_t n = 2; n <= limit_; ++n) {
    const std::uint32_t v = spf_[n];
    for (std::size_t i = 0; i < 4; ++i) {
      spf_bytes[4 * (n - 2) + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
  }
  out.write(spf_bytes.data(), static_cast<std::streamsize>(spf_bytes.size()));
  if (!out) throw ResourceLimit("failed writing sieve cache");
}

void SieveTables::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  save(out);
}

SieveTables SieveTables::load(std::istream& in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), magic.size())) throw InvalidArgument("sieve cache truncated in magic");
  if (magic != kCacheMagic) throw InvalidArgument("sieve cache has wrong magic");
  const std::uint64_t limit = read_u64(in);
  if (limit < 2 || limit > kDefaultSieveCap) throw InvalidArgument("sieve cache limit out of range");

  SieveTables t;
  t.limit_ = limit;
  t.mobius_.assign(limit + 1, 0);
  read_exact(in, reinterpret_cast<char*>(t.mobius_.data() + 1), limit, "mobius");

  std::vector<unsigned char> bits((limit + 7) / 8);
  read_exact(in, reinterpret_cast<char*>(bits.data()), bits.size(), "square-free flags");

  std::vector<unsigned char> spf_bytes(4 * (limit - 1));
  read_exact(in, reinterpret_cast<char*>(spf_bytes.data()), spf_bytes.size(), "spf");
  t.spf_.assign(limit + 1, 0);
  for (std::uint64_t n = 2; n <= limit; ++n) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v |= std::uint32_t{spf_bytes[4 * (n - 2) + i]} << (8 * i);
    if (v < 2 || v > n || n % v != 0) throw InvalidArgument("sieve cache spf entry invalid");
    t.spf_[n] = v;
    if (v == n) t.primes_.push_back(v);
  }

  t.derive_squarefree_bits();
  for (std::uint64_t n = 1; n <= limit; ++n) {
    const bool flag = (bits[(n - 1) / 8] >> ((n - 1) % 8)) & 1U;
    const int mu = t.mobius_[n];
    if (mu < -1 || mu > 1 || flag != (mu != 0)) {
      throw InvalidArgument("sieve cache mobius and square-free flags disagree");
    }
  }
  return t;
}

SieveTables SieveTables::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open sieve cache " + path.string());
  return load(in);
}

int kronecker(std::uint64_t a, std::uint64_t n) {
  if (n == 0) throw InvalidArgument("kronecker symbol needs n >= 1");
  int sign = 1;
  const int twos = std::countr_zero(n);
  if (twos > 0) {
    if ((a & 1U) == 0) return 0;
    const std::uint64_t r = a & 7U;
    if ((twos & 1) && (r == 3 || r == 5)) sign = -sign;
    n >>= twos;
  }
  // Jacobi symbol (a/n) for odd n.
  a %= n;
  while (a != 0) {
    const int z = std::countr_zero(a);
    a >>= z;
    const std::uint64_t r = n & 7U;
    if ((z & 1) && (r == 3 || r == 5)) sign = -sign;
    if ((a & 3U) == 3 && (n & 3U) == 3) sign = -sign;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? sign : 0;
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n, const SieveTables& tables) {
  if (n == 0) throw InvalidArgument("cannot factor 0");
  std::vector<std::uint64_t> out;
  if (n <= tables.limit()) {
    while (n > 1) {
      const std::uint32_t p = tables.spf(n);
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
    return out;
  }
  const std::uint64_t lim = tables.limit();
  if (n / lim > lim) throw InvalidArgument("value exceeds limit^2 and cannot be factored");
  for (const std::uint32_t p : tables.primes()) {
    if (std::uint64_t{p} * p > n) break;
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
      if (n <= lim) {
        auto rest = prime_divisors(n, tables);
        out.insert(out.end(), rest.begin(), rest.end());
        return out;
      }
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::uint64_t squarefree_kernel(std::uint64_t n, const SieveTables& tables) {
  if (n == 0) throw InvalidArgument("square-free kernel of 0 is undefined");
  std::uint64_t kernel = 1;
  for (const std::uint64_t p : prime_divisors(n, tables)) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e & 1U) kernel *= p;
  }
  return kernel;
}

std::vector<std::uint32_t> small_primes(std::uint32_t limit) {
  std::vector<std::uint32_t> out;
  if (limit < 2) return out;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return out;
}

}  // namespace qmoments
