#include <random>
#include <vector>

#include "doctest.h"
#include "sdg/kernels.hpp"

using namespace sdg::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar matmul matches a naive triple loop") {
    std::mt19937_64 rng(7);
    const int rows = 5, inner = 7, ncols = 3;
    auto A = random_vec(rng, rows * inner);
    auto X = random_vec(rng, inner * ncols);
    std::vector<double> Y(rows * ncols);
    matmul_scalar(A.data(), rows, inner, X.data(), ncols, Y.data(), false);
    for (int j = 0; j < ncols; ++j)
        for (int i = 0; i < rows; ++i) {
            double s = 0;
            for (int k = 0; k < inner; ++k) s += A[i * inner + k] * X[j * inner + k];
            CHECK(Y[j * rows + i] == doctest::Approx(s).epsilon(1e-15));
        }
}

TEST_CASE("accumulate adds to the output") {
    std::vector<double> A{1, 2, 3, 4};
    std::vector<double> X{1, 1};
    std::vector<double> Y{10, 20};
    matmul_scalar(A.data(), 2, 2, X.data(), 1, Y.data(), true);
    CHECK(Y[0] == 13);
    CHECK(Y[1] == 27);
}

#if SDG_HAVE_X86
TEST_CASE("AVX2 and scalar kernels agree") {
    if (!cpu_has_avx2()) return;
    std::mt19937_64 rng(11);
    for (int rows : {1, 2, 3, 7, 16, 36})
        for (int inner : {1, 3, 4, 5, 8, 15, 28, 45})
            for (int ncols : {1, 4}) {
                auto A = random_vec(rng, rows * inner);
                auto X = random_vec(rng, inner * ncols);
                std::vector<double> Ys(rows * ncols, 0.5), Yv(rows * ncols, 0.5);
                matmul_scalar(A.data(), rows, inner, X.data(), ncols, Ys.data(), true);
                matmul_avx2(A.data(), rows, inner, X.data(), ncols, Yv.data(), true);
                for (std::size_t i = 0; i < Ys.size(); ++i)
                    CHECK(Yv[i] == doctest::Approx(Ys[i]).epsilon(1e-13));
            }
}
#endif

TEST_CASE("dispatcher honours the selected variant") {
    Isa before = active_isa();
    CHECK(select_isa(Isa::Scalar) == Isa::Scalar);
    CHECK(active_isa() == Isa::Scalar);
    Isa got = select_isa(Isa::Avx2);
    CHECK(got == (cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar));
    select_isa(before);
}
