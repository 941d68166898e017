#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "spikebayes/bessel.hpp"
#include "spikebayes/errors.hpp"
#include "spikebayes/forward.hpp"

using namespace spikebayes;

namespace {

const Domain unit_interval({0.0}, {1.0});

DiscreteMeasure random_measure(std::mt19937_64& rng, const Domain& dom, ScalarField field, std::size_t max_atoms = 5) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    DiscreteMeasure u(dom.dim(), 1, field);
    const auto n = std::uniform_int_distribution<std::size_t>(0, max_atoms)(rng);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> y(dom.dim());
        for (std::size_t a = 0; a < dom.dim(); ++a) y[a] = dom.lower()[a] + dom.width(a) * unif(rng);
        const Scalar q = field == ScalarField::real ? Scalar(normal(rng)) : Scalar(normal(rng), normal(rng));
        u.push_back(y, std::vector<Scalar>{q});
    }
    return u;
}

double sup_distance(const Observation& a, const Observation& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

double sup_norm(const Observation& a) {
    double s = 0.0;
    for (const auto& x : a) s = std::max(s, std::abs(x));
    return s;
}

std::vector<std::shared_ptr<const KernelForward>> stock_forwards() {
    std::vector<std::shared_ptr<const KernelForward>> out;
    out.push_back(std::make_shared<KernelForward>(
        KernelForward::gaussian_kernel(unit_interval, SensorSet::grid({0.0}, {1.0}, {7}), 0.15)));
    const Domain square({0.0, 0.0}, {1.0, 1.0});
    out.push_back(std::make_shared<KernelForward>(
        KernelForward::helmholtz_monopole(square, SensorSet{{{-1.0, 0.3}, {2.0, 0.8}, {0.5, 3.0}}}, 6.0, 2)));
    const Domain cube({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    out.push_back(std::make_shared<KernelForward>(
        KernelForward::helmholtz_monopole(cube, SensorSet{{{-1.0, 0.5, 0.5}, {0.5, 2.5, 0.5}}}, 4.0, 3)));
    return out;
}

}  // namespace

TEST_CASE("gaussian kernel examples") {
    const auto fwd = KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.4}}}, 0.2);
    DiscreteMeasure u(1, 1);
    u.push_back(std::vector<double>{0.4}, 2.5);
    CHECK(apply(fwd, u)[0] == Scalar(2.5));

    const double sigma = 0.2;
    DiscreteMeasure v(1, 1);
    v.push_back(std::vector<double>{0.4 + sigma * std::sqrt(2.0 * std::log(2.0))}, 1.0);
    CHECK(apply(fwd, v)[0].real() == doctest::Approx(0.5).epsilon(1e-14));

    const auto zero = apply(fwd, DiscreteMeasure(1, 1));
    REQUIRE(zero.size() == 1);
    CHECK(zero[0] == Scalar(0.0));

    CHECK_THROWS_AS(apply(fwd, DiscreteMeasure(2, 1)), DimensionMismatch);
    CHECK_THROWS_AS(apply(fwd, DiscreteMeasure(1, 1, ScalarField::complex)), DimensionMismatch);
    CHECK_THROWS_AS(KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.4}}}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(KernelForward::gaussian_kernel(unit_interval, SensorSet{}, 0.1), InvalidArgument);
}

TEST_CASE("complex output gaussian kernel accepts complex measures") {
    const auto fwd = KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.0}, {1.0}}}, 0.5, ScalarField::complex);
    DiscreteMeasure u(1, 1, ScalarField::complex);
    u.push_back(std::vector<double>{0.0}, std::vector<Scalar>{{1.0, -2.0}});
    const auto g = apply(fwd, u);
    CHECK(g[0] == Scalar(1.0, -2.0));
    CHECK(std::abs(g[1] - std::exp(-2.0) * Scalar(1.0, -2.0)) < 1e-15);
}

TEST_CASE("discretized forward examples") {
    auto base = std::make_shared<KernelForward>(KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.0}}}, 1.0));
    const DiscretizedForward coarse(base, 2);
    DiscreteMeasure u(1, 1);
    u.push_back(std::vector<double>{0.26}, 1.0);
    CHECK(apply_discretized(coarse, u)[0].real() == doctest::Approx(std::exp(-0.125)).epsilon(1e-15));

    DiscreteMeasure on_node(1, 1);
    on_node.push_back(std::vector<double>{0.5}, -2.0);
    CHECK(apply_discretized(coarse, on_node) == apply(*base, on_node));

    CHECK(coarse.node(0, 0) == 0.0);
    CHECK(coarse.node(0, 1) == 0.5);
    CHECK(coarse.node(0, 2) == 1.0);
    CHECK(coarse.max_snap_distance() == doctest::Approx(0.25));
    CHECK_THROWS_AS(DiscretizedForward(base, 0), InvalidArgument);
}

TEST_CASE("discretization error stays under the Lipschitz bound") {
    std::mt19937_64 rng(21);
    for (const auto& base : stock_forwards()) {
        for (std::size_t grid_n : {2, 4, 8, 16, 32}) {
            const DiscretizedForward disc(base, grid_n);
            for (int rep = 0; rep < 50; ++rep) {
                const auto u = random_measure(rng, base->source_domain(), base->output_field() == ScalarField::complex
                                                                            ? ScalarField::complex
                                                                            : ScalarField::real);
                const double err = sup_distance(apply_discretized(disc, u), apply(*base, u));
                CHECK(err <= disc.error_bound(u) * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}

TEST_CASE("discretization error is nonincreasing along doubling grids") {
    std::mt19937_64 rng(22);
    for (const auto& base : stock_forwards()) {
        std::vector<DiscreteMeasure> tests;
        for (int rep = 0; rep < 200; ++rep)
            tests.push_back(random_measure(rng, base->source_domain(), base->output_field() == ScalarField::complex
                                                                         ? ScalarField::complex
                                                                         : ScalarField::real));
        double prev = INFINITY;
        for (std::size_t grid_n = 2; grid_n <= 256; grid_n *= 2) {
            const DiscretizedForward disc(base, grid_n);
            double sup = 0.0;
            for (const auto& u : tests) {
                const double tv = total_variation(u);
                if (tv > 0.0) sup = std::max(sup, sup_distance(apply_discretized(disc, u), apply(*base, u)) / tv);
            }
            CHECK(sup <= prev);
            prev = sup;
        }
        CHECK(prev < 1e-2);
    }
}

TEST_CASE("forward operators are linear") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& fwd : stock_forwards()) {
        const ScalarField field = fwd->output_field();
        for (int rep = 0; rep < 100; ++rep) {
            const auto u = random_measure(rng, fwd->source_domain(), field);
            const auto v = random_measure(rng, fwd->source_domain(), field);
            const Scalar a = field == ScalarField::real ? Scalar(normal(rng)) : Scalar(normal(rng), normal(rng));
            const Scalar b = field == ScalarField::real ? Scalar(normal(rng)) : Scalar(normal(rng), normal(rng));
            const auto lhs = apply(*fwd, linear_combine(a, u, b, v));
            const auto gu = apply(*fwd, u);
            const auto gv = apply(*fwd, v);
            Observation rhs(gu.size());
            for (std::size_t i = 0; i < gu.size(); ++i) rhs[i] = a * gu[i] + b * gv[i];
            const double scale = std::abs(a) * sup_norm(gu) + std::abs(b) * sup_norm(gv);
            CHECK(sup_distance(lhs, rhs) <= 1e-12 * std::max(scale, 1e-300));
        }
    }
}

TEST_CASE("weak* continuity witness") {
    std::mt19937_64 rng(24);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& fwd : stock_forwards()) {
        const Domain& dom = fwd->source_domain();
        const double lip = fwd->lipschitz();
        for (int seq = 0; seq < 20; ++seq) {
            std::vector<double> y(dom.dim());
            for (auto& c : y) c = unif(rng);
            const Scalar q(normal(rng), 0.0);
            DiscreteMeasure limit(dom.dim(), 1, fwd->output_field());
            limit.push_back(y, std::vector<Scalar>{q});
            const auto g = apply(*fwd, limit);
            for (int n = 1; n <= 20; ++n) {
                std::vector<double> yn(y);
                for (auto& c : yn) c += std::pow(0.7, n) * normal(rng);
                dom.reflect(yn);
                double dist = 0.0;
                for (std::size_t a = 0; a < y.size(); ++a) dist += (yn[a] - y[a]) * (yn[a] - y[a]);
                dist = std::sqrt(dist);
                DiscreteMeasure un(dom.dim(), 1, fwd->output_field());
                un.push_back(yn, std::vector<Scalar>{q});
                CHECK(sup_distance(apply(*fwd, un), g) <= lip * std::abs(q) * dist * (1.0 + 1e-9) + 1e-15);
            }
        }
    }
}

TEST_CASE("gaussian kernel Lipschitz constant is attained") {
    const double sigma = 0.1;
    const auto fwd = KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.5}}}, sigma);
    double best = 0.0;
    const double h = 1e-7;
    for (int i = 0; i < 2000; ++i) {
        const double y = 0.3 + 0.4 * i / 2000.0;
        DiscreteMeasure a(1, 1);
        DiscreteMeasure b(1, 1);
        a.push_back(std::vector<double>{y}, 1.0);
        b.push_back(std::vector<double>{y + h}, 1.0);
        best = std::max(best, std::abs(apply(fwd, b)[0] - apply(fwd, a)[0]) / h);
    }
    CHECK(best <= fwd.lipschitz() * (1.0 + 1e-6));
    CHECK(best >= fwd.lipschitz() * 0.999);
}

TEST_CASE("helmholtz kernel examples") {
    const std::vector<double> x{0.0, 0.0, 0.0};
    const std::vector<double> y{0.3, 0.4, 0.0};  // r = 0.5
    const double r = 0.5;
    const Scalar small = helmholtz_kernel(1e-12, 3, x, y);
    CHECK(small.real() == doctest::Approx(1.0 / (4.0 * oracle::kPi * r)).epsilon(1e-12));
    CHECK(std::abs(small.imag()) < 1e-12);
    const Scalar half_turn = helmholtz_kernel(oracle::kPi / r, 3, x, y);
    CHECK(half_turn.real() == doctest::Approx(-1.0 / (4.0 * oracle::kPi * r)).epsilon(1e-14));
    CHECK(std::abs(half_turn.imag()) < 1e-14);

    // kappa r = 1 in 2-D: (i/4)(J0(1) + i Y0(1)).
    const long double j0 = oracle::bessel_j0_series(1.0L);
    const long double y0 = oracle::bessel_y0_series(1.0L);
    CHECK(static_cast<double>(j0) == doctest::Approx(0.7651976865579666).epsilon(1e-15));
    CHECK(static_cast<double>(y0) == doctest::Approx(0.0882569642156769).epsilon(1e-13));
    const Scalar h2 = helmholtz_kernel(2.0, 2, std::vector<double>{0.0, 0.0}, std::vector<double>{0.3, 0.4});
    CHECK(h2.real() == doctest::Approx(-0.25 * static_cast<double>(y0)).epsilon(1e-12));
    CHECK(h2.imag() == doctest::Approx(0.25 * static_cast<double>(j0)).epsilon(1e-12));

    CHECK_THROWS_AS(helmholtz_kernel(1.0, 3, x, x), InvalidArgument);
    CHECK_THROWS_AS(helmholtz_kernel(1.0, 4, x, y), InvalidArgument);
}

TEST_CASE("Bessel functions match independent oracles over [1e-3, 1e3]") {
    double worst = 0.0;
    for (int i = 0; i <= 600; ++i) {
        const double x = std::pow(10.0, -3.0 + 6.0 * i / 600.0);
        const double ej0 = std::abs(bessel::j0(x) - boost::math::cyl_bessel_j(0, x));
        const double ey0 = std::abs(bessel::y0(x) - boost::math::cyl_neumann(0, x)) / std::max(1.0, std::abs(boost::math::cyl_neumann(0, x)));
        const double ej1 = std::abs(bessel::j1(x) - boost::math::cyl_bessel_j(1, x));
        const double ey1 = std::abs(bessel::y1(x) - boost::math::cyl_neumann(1, x)) / std::max(1.0, std::abs(boost::math::cyl_neumann(1, x)));
        worst = std::max({worst, ej0, ey0, ej1, ey1});
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("helmholtz forward requires separated sensors") {
    const Domain square({0.0, 0.0}, {1.0, 1.0});
    CHECK_THROWS_AS(KernelForward::helmholtz_monopole(square, SensorSet{{{0.5, 0.5}}}, 1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(KernelForward::helmholtz_monopole(square, SensorSet{{{1.0, 0.5}}}, 1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(KernelForward::helmholtz_monopole(square, SensorSet{{{2.0, 0.5}}}, 1.0, 3), DimensionMismatch);
    const auto ok = KernelForward::helmholtz_monopole(square, SensorSet{{{2.0, 0.5}}}, 1.0, 2);
    CHECK(ok.output_field() == ScalarField::complex);
}

TEST_CASE("sensor grids and grid nodes") {
    const auto s = SensorSet::grid({0.0, -1.0}, {1.0, 1.0}, {3, 2});
    REQUIRE(s.size() == 6);
    CHECK(s.points[0] == std::vector<double>{0.0, -1.0});
    CHECK(s.points[1] == std::vector<double>{0.0, 1.0});
    CHECK(s.points[5] == std::vector<double>{1.0, 1.0});
    const Domain box({0.0, 0.0}, {1.0, 2.0});
    const auto nodes = grid_nodes(box, 4);
    CHECK(nodes.size() == 25);
    CHECK(nodes[1] == std::vector<double>{0.0, 0.5});
    auto base = std::make_shared<KernelForward>(KernelForward::gaussian_kernel(box, SensorSet{{{0.0, 0.0}}}, 1.0));
    const DiscretizedForward disc(base, 4);
    std::vector<double> snapped(2);
    disc.snap(std::vector<double>{0.13, 1.74}, snapped);
    CHECK(snapped == std::vector<double>{0.25, 1.5});
    for (const auto& n : nodes) {
        disc.snap(n, snapped);
        CHECK(snapped == n);
    }
}

TEST_CASE("tabulated kernels interpolate and round-trip through CSV") {
    const Domain box({0.0, 0.0}, {1.0, 1.0});
    const SensorSet sensors{{{0.2, 0.2}, {0.8, 0.6}}};
    const auto exact = KernelForward::gaussian_kernel(box, sensors, 0.3, ScalarField::complex);
    TabulatedKernel table{box, {21, 21}, sensors.size(), 1, ScalarField::complex, {}};
    std::vector<Scalar> row(1);
    for (std::size_t i = 0; i < 21; ++i)
        for (std::size_t j = 0; j < 21; ++j)
            for (std::size_t s = 0; s < sensors.size(); ++s) {
                exact.kernel_row(s, std::vector<double>{i / 20.0, j / 20.0}, row);
                table.values.push_back(row[0] * Scalar(1.0, 0.5));
            }
    const auto tab = KernelForward::tabulated(table);
    DiscreteMeasure node(2, 1, ScalarField::complex);
    node.push_back(std::vector<double>{0.35, 0.6}, std::vector<Scalar>{{1.0, 0.0}});
    const auto g_tab = apply(tab, node);
    const auto g_exact = apply(exact, node);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(g_tab[i] - g_exact[i] * Scalar(1.0, 0.5)) < 1e-14);

    DiscreteMeasure off(2, 1, ScalarField::complex);
    off.push_back(std::vector<double>{0.333, 0.617}, std::vector<Scalar>{{1.0, 0.0}});
    const auto o_tab = apply(tab, off);
    const auto o_exact = apply(exact, off);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(o_tab[i] - o_exact[i] * Scalar(1.0, 0.5)) < 5e-3);
    CHECK(tab.lipschitz() > 0.0);
    CHECK(tab.lipschitz() <= 1.3 * std::abs(Scalar(1.0, 0.5)) * std::sqrt(2.0) / (0.3 * std::sqrt(std::exp(1.0))));

    const auto path = std::filesystem::temp_directory_path() / "spikebayes_tab_roundtrip.csv";
    save_tabulated_kernel(path, table);
    const auto loaded = load_tabulated_kernel(path);
    CHECK(loaded == table);

    {
        std::ofstream bad(path);
        bad << "tabulated_kernel,1\nd,2\nlower,0,0\n";
    }
    CHECK_THROWS_AS(load_tabulated_kernel(path), IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_tabulated_kernel(path), IoError);
}
