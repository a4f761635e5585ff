#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Element of the primal space E, stored as coordinates in the standard basis.
struct Vec {
    std::vector<double> coords;

    Vec() = default;
    explicit Vec(std::vector<double> c) : coords(std::move(c)) {}
    Vec(std::initializer_list<double> c) : coords(c) {}

    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }
};

/// Element of the dual space E*, acting on Vec through the standard pairing.
struct Func {
    std::vector<double> coords;

    Func() = default;
    explicit Func(std::vector<double> c) : coords(std::move(c)) {}
    Func(std::initializer_list<double> c) : coords(c) {}

    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }
};

inline double pairing(const Func& f, const Vec& v) {
    if (f.dim() != v.dim()) throw std::invalid_argument("pairing: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.dim(); ++i) s += f.coords[i] * v.coords[i];
    return s;
}

inline Vec scaled(const Vec& v, double c) {
    Vec r = v;
    for (auto& x : r.coords) x *= c;
    return r;
}

inline Func scaled(const Func& f, double c) {
    Func r = f;
    for (auto& x : r.coords) x *= c;
    return r;
}

inline Func add(const Func& a, const Func& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("add: dimension mismatch");
    Func r = a;
    for (std::size_t i = 0; i < b.dim(); ++i) r.coords[i] += b.coords[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("add: dimension mismatch");
    Vec r = a;
    for (std::size_t i = 0; i < b.dim(); ++i) r.coords[i] += b.coords[i];
    return r;
}

inline Vec basis_vec(std::size_t dim, std::size_t i, double value = 1.0) {
    Vec v(std::vector<double>(dim, 0.0));
    v.coords.at(i) = value;
    return v;
}

inline Func basis_func(std::size_t dim, std::size_t i, double value = 1.0) {
    Func f(std::vector<double>(dim, 0.0));
    f.coords.at(i) = value;
    return f;
}

inline double euclidean_norm(const std::vector<double>& c) {
    double s = 0.0;
    for (double x : c) s += x * x;
    return std::sqrt(s);
}

/// Deterministic PRNG (splitmix64 core). All stochastic choices in the library
/// run through this generator so that results depend only on the seed, not on
/// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::size_t index(std::size_t n) { return std::size_t(next_u64() % std::uint64_t(n)); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform01(); } while (u1 <= 0.0);
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::vector<double> gaussian_vector(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = gaussian();
        return v;
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fbl
