#include "svitorus/fft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace svt::fft {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Plan {
    int n = 0;
    std::vector<int> bitrev;
    // Twiddles for all stages, concatenated: stage with half-length m uses
    // m entries starting at offset m (for m = 1, 2, 4, ... n/2).
    std::vector<std::complex<double>> twiddle;

    explicit Plan(int size) : n(size) {
        bitrev.resize(static_cast<std::size_t>(n));
        int log2n = 0;
        while ((1 << log2n) < n) ++log2n;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < log2n; ++b) {
                if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
            }
            bitrev[static_cast<std::size_t>(i)] = r;
        }
        twiddle.resize(static_cast<std::size_t>(n));
        for (int m = 1; m < n; m <<= 1) {
            for (int j = 0; j < m; ++j) {
                const double ang = -kTwoPi * j / (2.0 * m);
                twiddle[static_cast<std::size_t>(m + j)] = {std::cos(ang), std::sin(ang)};
            }
        }
    }
};

const Plan& plan_for(int n) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: length must be a power of two >= 2");
    static std::mutex mu;
    static std::map<int, Plan> plans;
    std::lock_guard<std::mutex> lock(mu);
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.emplace(n, Plan(n)).first;
    return it->second;
}

template <bool Inverse>
void transform(std::complex<double>* a, const Plan& p) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        const int r = p.bitrev[static_cast<std::size_t>(i)];
        if (i < r) std::swap(a[i], a[r]);
    }
    for (int m = 1; m < n; m <<= 1) {
        const std::complex<double>* w = p.twiddle.data() + m;
        for (int k = 0; k < n; k += 2 * m) {
            std::complex<double>* lo = a + k;
            std::complex<double>* hi = a + k + m;
            for (int j = 0; j < m; ++j) {
                const double wr = w[j].real();
                const double wi = Inverse ? -w[j].imag() : w[j].imag();
                const double hr = hi[j].real();
                const double hh = hi[j].imag();
                const double tr = wr * hr - wi * hh;
                const double ti = wr * hh + wi * hr;
                const double lr = lo[j].real();
                const double li = lo[j].imag();
                hi[j] = {lr - tr, li - ti};
                lo[j] = {lr + tr, li + ti};
            }
        }
    }
}

// DIT transform along axis 0 of row-major n x n data. Every butterfly touches
// two whole rows, so the inner loops run over contiguous memory and vectorize.
template <bool Inverse>
void transform_axis0(std::complex<double>* a, const Plan& p) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        const int r = p.bitrev[static_cast<std::size_t>(i)];
        if (i < r) {
            std::swap_ranges(a + static_cast<std::size_t>(i) * n,
                             a + static_cast<std::size_t>(i + 1) * n,
                             a + static_cast<std::size_t>(r) * n);
        }
    }
    for (int m = 1; m < n; m <<= 1) {
        const std::complex<double>* w = p.twiddle.data() + m;
        for (int k = 0; k < n; k += 2 * m) {
            for (int j = 0; j < m; ++j) {
                const double wr = w[j].real();
                const double wi = Inverse ? -w[j].imag() : w[j].imag();
                double* lo = reinterpret_cast<double*>(a + static_cast<std::size_t>(k + j) * n);
                double* hi = reinterpret_cast<double*>(a + static_cast<std::size_t>(k + j + m) * n);
                for (int c = 0; c < 2 * n; c += 2) {
                    const double hr = hi[c];
                    const double hh = hi[c + 1];
                    const double tr = wr * hr - wi * hh;
                    const double ti = wr * hh + wi * hr;
                    const double lr = lo[c];
                    const double li = lo[c + 1];
                    hi[c] = lr - tr;
                    hi[c + 1] = li - ti;
                    lo[c] = lr + tr;
                    lo[c + 1] = li + ti;
                }
            }
        }
    }
}

void transpose(std::complex<double>* a, int n, std::vector<std::complex<double>>& scratch) {
    scratch.assign(a, a + static_cast<std::size_t>(n) * n);
    constexpr int kBlock = 16;
    for (int ib = 0; ib < n; ib += kBlock) {
        for (int jb = 0; jb < n; jb += kBlock) {
            const int imax = std::min(ib + kBlock, n);
            const int jmax = std::min(jb + kBlock, n);
            for (int i = ib; i < imax; ++i) {
                for (int j = jb; j < jmax; ++j) {
                    a[static_cast<std::size_t>(j) * n + i] = scratch[static_cast<std::size_t>(i) * n + j];
                }
            }
        }
    }
}

template <bool Inverse>
void transform2d(std::complex<double>* a, int n) {
    const Plan& p = plan_for(n);
    thread_local std::vector<std::complex<double>> scratch;
    transform_axis0<Inverse>(a, p);
    transpose(a, n, scratch);
    transform_axis0<Inverse>(a, p);
    transpose(a, n, scratch);
}

}  // namespace

void forward(std::complex<double>* data, int n) { transform<false>(data, plan_for(n)); }
void inverse(std::complex<double>* data, int n) { transform<true>(data, plan_for(n)); }
void forward2d(std::complex<double>* data, int n) { transform2d<false>(data, n); }
void inverse2d(std::complex<double>* data, int n) { transform2d<true>(data, n); }

}  // namespace svt::fft
