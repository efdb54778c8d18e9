// Compares the OpenMP kernels against their serial reference
// implementations: wall time and maximum elementwise difference (which must
// be exactly zero -- both paths share the per-row accumulation order).

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crescal/classifier.hpp"
#include "crescal/dense.hpp"
#include "crescal/linear.hpp"
#include "crescal/rng.hpp"
#include "crescal/sparse.hpp"

using namespace crescal;

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn, int reps) {
    const auto t0 = clock_type::now();
    for (int i = 0; i < reps; ++i)
        fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() /
           static_cast<double>(reps);
}

DenseMatrix random_dense(std::size_t rows, std::size_t cols, Rng& rng) {
    DenseMatrix m(rows, cols);
    for (double& x : m.data())
        x = rng.uniform();
    return m;
}

SparseMatrix random_sparse(std::size_t n, double density, Rng& rng) {
    std::vector<SparseEntry> entries;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (rng.bernoulli(density))
                entries.push_back({i, j, 1.0});
    return SparseMatrix::from_entries(n, n, std::move(entries), true);
}

void report(const char* name, double serial_ms, double parallel_ms,
            double max_diff) {
    std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   max|diff| %g\n",
                name, serial_ms, parallel_ms,
                parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0, max_diff);
}

} // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0)
            quick = true;

    const std::size_t n = quick ? 400 : 4000;
    const std::size_t r = 10;
    const double density = quick ? 0.02 : 0.005;
    const int reps = quick ? 3 : 5;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif
    std::printf("n = %zu, r = %zu, density = %g\n\n", n, r, density);

    Rng rng(7);
    const SparseMatrix s = random_sparse(n, density, rng);
    const DenseMatrix a = random_dense(n, r, rng);
    std::printf("nnz = %zu\n", s.nnz());

    {
        DenseMatrix ys, yp;
        const double ts = time_ms([&] { ys = serial::spmm(s, a); }, reps);
        const double tp = time_ms([&] { yp = spmm(s, a); }, reps);
        report("spmm", ts, tp, max_abs_diff(ys, yp));
    }
    {
        DenseMatrix ys, yp;
        const double ts = time_ms([&] { ys = serial::spmm_t(s, a); }, reps);
        const double tp = time_ms([&] { yp = spmm_t(s, a); }, reps);
        report("spmm_t", ts, tp, max_abs_diff(ys, yp));
    }
    {
        DenseMatrix ys, yp;
        const double ts = time_ms([&] { ys = serial::matmul_tn(a, a); }, reps);
        const double tp = time_ms([&] { yp = matmul_tn(a, a); }, reps);
        report("matmul_tn (gram)", ts, tp, max_abs_diff(ys, yp));
    }
    {
        const DenseMatrix b = random_dense(r, r, rng);
        DenseMatrix ys, yp;
        const double ts = time_ms([&] { ys = serial::matmul(a, b); }, reps);
        const double tp = time_ms([&] { yp = matmul(a, b); }, reps);
        report("matmul (n x r)", ts, tp, max_abs_diff(ys, yp));
    }
    {
        LabelSet labels;
        Rng lrng(11);
        for (std::size_t i = 0; i < n; ++i)
            labels.set(i, lrng.bernoulli(0.5) ? 1 : -1);
        ClassifierOutput os, op;
        const double ts =
            time_ms([&] { os = serial::knn_predict(a, labels, 5); }, 1);
        const double tp = time_ms(
            [&] { op = knn_predict(a, labels, 5, KnnBackend::exhaustive); }, 1);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diff += std::abs(os.predictions[i] - op.predictions[i]);
        report("knn_predict", ts, tp, diff);

        ClassifierOutput ok;
        const double tk = time_ms(
            [&] { ok = knn_predict(a, labels, 5, KnnBackend::kdtree); }, 1);
        double kd_diff = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            kd_diff += std::abs(os.predictions[i] - ok.predictions[i]);
        report("knn kd-tree", ts, tk, kd_diff);
    }
    return 0;
}
