#include <doctest.h>

#include <random>
#include <vector>

#include "farfield/kernels.hpp"

using namespace farfield;

namespace {

struct Row {
    std::vector<double> v[10];

    explicit Row(size_t n, unsigned seed) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& a : v) {
            a.resize(n);
            for (auto& x : a) x = u(rng);
        }
    }
    CellRow view() const {
        return {v[0].data(), v[1].data(), v[2].data(), v[3].data(), v[4].data(),
                v[5].data(), v[6].data(), v[7].data(), v[8].data(), v[9].data(), v[0].size()};
    }
};

// Straightforward complex arithmetic, one cell at a time.
cplx reference(const CellRow& r, double x1, double x2) {
    cplx s = 0.0;
    for (size_t k = 0; k < r.n; ++k) {
        cplx w(1.0 - r.m11[k] * r.m22[k] + r.m12[k] * r.m21[k], r.m11[k] + r.m22[k]);
        s += cplx(r.f_re[k], r.f_im[k]) * w * std::exp(x1 * r.eta1[k] + x2 * r.eta2[k]) * cplx(r.ph_re[k], r.ph_im[k]);
    }
    return s;
}

}  // namespace

TEST_CASE("scalar kernel matches plain complex arithmetic") {
    for (size_t n : {1u, 3u, 8u, 9u, 100u, 401u}) {
        Row row(n, static_cast<unsigned>(n));
        cplx ref = reference(row.view(), 0.7, -1.3);
        CHECK(std::abs(row_sum_scalar(row.view(), 0.7, -1.3) - ref) <= 1e-12 * (1.0 + std::abs(ref)));
    }
}

TEST_CASE("AVX2 kernel is equivalent to the scalar kernel") {
    if (!avx2_available()) {
        MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
        CHECK(resolve_kernel(KernelKind::Auto) == KernelKind::Scalar);
        return;
    }
    for (size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 100u, 401u, 1601u}) {
        Row row(n, static_cast<unsigned>(n) + 17);
        for (auto [x1, x2] : {std::pair{0.0, 0.0}, std::pair{2.5, -4.0}, std::pair{-10.0, 7.0}}) {
            cplx a = row_sum_scalar(row.view(), x1, x2);
            cplx b = row_sum_avx2(row.view(), x1, x2);
            CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)));
        }
    }
    CHECK(resolve_kernel(KernelKind::Auto) == KernelKind::Avx2);
}

TEST_CASE("dispatch and determinism") {
    Row row(257, 5);
    cplx a = row_sum(row.view(), 1.0, 2.0, KernelKind::Scalar);
    CHECK(a == row_sum(row.view(), 1.0, 2.0, KernelKind::Scalar));
    cplx b = row_sum(row.view(), 1.0, 2.0, KernelKind::Auto);
    CHECK(b == row_sum(row.view(), 1.0, 2.0, KernelKind::Auto));
    CHECK(std::string(kernel_name(KernelKind::Scalar)) == "scalar");
    Row empty(0, 1);
    CHECK(row_sum_scalar(empty.view(), 1.0, 1.0) == cplx(0.0));
}
