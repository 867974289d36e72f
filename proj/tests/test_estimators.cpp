#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "crn/estimators.hpp"
#include "crn/hash.hpp"
#include "crn/transform.hpp"

using namespace crn;
using namespace crn::bb;
namespace est = crn::est;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// partial transform matrix W[k,l] = exp(-j 2 pi k l / K)
Mat transform_matrix(int K, int taps) {
    Mat w(K, taps);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < taps; ++l)
            w(k, l) = std::polar(1.0, -kTwoPi * static_cast<double>(k) * l / K);
    return w;
}

SymbolGrid random_bpsk(int K, Rng& rng) {
    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(K));
    for (auto& b : bits) b = static_cast<std::uint8_t>(bit(rng));
    return modulate(bits, Modulation::bpsk);
}

double rel_inf_dev(std::span<const cxd> value, std::span<const cxd> oracle) {
    double scale = 0.0;
    for (const cxd& v : oracle) scale = std::max(scale, std::abs(v));
    double dev = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i)
        dev = std::max(dev, std::abs(value[i] - oracle[i]));
    return scale > 0.0 ? dev / scale : dev;
}

struct Instance {
    Cir cir;
    Ctf ctf;
    SymbolGrid x;
    SymbolGrid y;
    est::EstimatorParams params;
};

Instance make_instance(int K, int taps, double sigma_w_sq, std::uint64_t seed) {
    Rng rng(seed);
    Instance inst;
    inst.cir = generate_cir(exponential_profile(taps), rng);
    MultCounter mc;
    inst.ctf = cir_to_ctf(inst.cir, K, mc);
    inst.x = random_bpsk(K, rng);
    inst.y = apply_channel(inst.x, inst.ctf, {sigma_w_sq}, rng);
    inst.params = est::make_params(sigma_w_sq, inst.cir.profile, taps);
    return inst;
}

} // namespace

TEST_CASE("LS examples") {
    MultCounter mc;
    SymbolGrid y;
    SymbolGrid x;

    SUBCASE("unit reference") {
        y.symbols = {cxd(0.5, -0.3)};
        x.symbols = {cxd(1, 0)};
        const Ctf h = est::ls_ctf(y, x, mc);
        CHECK(h.coeffs[0] == cxd(0.5, -0.3));
        CHECK(mc.complex_mults == 1);
    }
    SUBCASE("sign flip") {
        y.symbols = {cxd(0.2, 0.1)};
        x.symbols = {cxd(-1, 0)};
        const Ctf h = est::ls_ctf(y, x, mc);
        CHECK(std::abs(h.coeffs[0] - cxd(-0.2, -0.1)) < 1e-15);
    }
    SUBCASE("noiseless LS is exact") {
        const Instance inst = make_instance(64, 4, 0.0, 11);
        const Ctf h = est::ls_ctf(inst.y, inst.x, mc);
        CHECK(rel_inf_dev(h.coeffs, inst.ctf.coeffs) < 1e-12);
        CHECK(mc.complex_mults == 64);
    }
    SUBCASE("zero reference symbol rejected") {
        y.symbols = {cxd(1, 0)};
        x.symbols = {cxd(0, 0)};
        CHECK_THROWS_AS(est::ls_ctf(y, x, mc), std::invalid_argument);
    }
}

TEST_CASE("scalar MMSE examples") {
    MultCounter mc;

    SUBCASE("zero noise reduces to LS") {
        const Instance inst = make_instance(64, 4, 0.0, 12);
        const Ctf mmse = est::scalar_mmse_ctf(inst.y, inst.x, inst.params, mc);
        const Ctf ls = est::ls_ctf(inst.y, inst.x, mc);
        CHECK(rel_inf_dev(mmse.coeffs, ls.coeffs) < 1e-14);
    }
    SUBCASE("sigma_w^2 == sigma_H^2 halves the LS estimate on BPSK") {
        Instance inst = make_instance(32, 4, 1.0, 13);
        // sigma_H^2 is 1 by profile normalization, so the ratio is 1
        const Ctf mmse = est::scalar_mmse_ctf(inst.y, inst.x, inst.params, mc);
        const Ctf ls = est::ls_ctf(inst.y, inst.x, mc);
        for (int k = 0; k < 32; ++k)
            CHECK(std::abs(mmse.coeffs[static_cast<std::size_t>(k)] -
                           0.5 * ls.coeffs[static_cast<std::size_t>(k)]) < 1e-13);
    }
    SUBCASE("matches an independent per-carrier Wiener computation") {
        const Instance inst = make_instance(64, 4, 0.37, 14);
        const Ctf mmse = est::scalar_mmse_ctf(inst.y, inst.x, inst.params, mc);
        for (int k = 0; k < 64; ++k) {
            const cxd xk = inst.x.symbols[static_cast<std::size_t>(k)];
            const cxd yk = inst.y.symbols[static_cast<std::size_t>(k)];
            const cxd expect = std::conj(xk) * yk /
                               (std::norm(xk) + inst.params.sigma_w_sq / inst.params.sigma_h_sq);
            CHECK(std::abs(mmse.coeffs[static_cast<std::size_t>(k)] - expect) < 1e-12);
        }
    }
}

TEST_CASE("direct MMSE SS-CIR estimator") {
    MultCounter mc;

    SUBCASE("noiseless consistency") {
        Instance inst = make_instance(64, 4, 0.0, 15);
        inst.params = est::make_params(1e-12, inst.cir.profile, 4);
        const Cir est_cir = est::mmse_cir_direct(inst.y, inst.x, inst.params, mc);
        for (int l = 0; l < 4; ++l)
            CHECK(std::abs(est_cir.taps[static_cast<std::size_t>(l)] -
                           inst.cir.taps[static_cast<std::size_t>(l)]) < 1e-6);
    }

    SUBCASE("K=4, single-tap closed form") {
        const double sigma0 = 0.8;
        const double sigma_w = 0.3;
        Rng rng(16);
        SymbolGrid x;
        x.symbols.assign(4, cxd(1, 0));
        SymbolGrid y;
        y.symbols = {cxd(0.4, 0.1), cxd(0.2, -0.5), cxd(-0.3, 0.2), cxd(0.9, 0.0)};
        auto params = est::make_params(sigma_w, {sigma0}, 1);
        const Cir est_cir = est::mmse_cir_direct(y, x, params, mc);
        cxd sum(0, 0);
        for (const cxd& v : y.symbols) sum += v;
        const cxd expect = sigma0 * sum / (sigma_w + 4.0 * sigma0);
        CHECK(std::abs(est_cir.taps[0] - expect) < 1e-12);
    }

    SUBCASE("matches the stacked-model linear MMSE oracle") {
        for (std::uint64_t seed : {21, 22, 23, 24, 25}) {
            const Instance inst = make_instance(64, 4, 0.2, seed);
            const Cir est_cir = est::mmse_cir_direct(inst.y, inst.x, inst.params, mc);

            // oracle: h = C_h A^H (A C_h A^H + sigma_w^2 I)^{-1} y, A = diag(x) W
            const Mat w = transform_matrix(64, 4);
            Mat a = w;
            for (int k = 0; k < 64; ++k)
                a.row(k) *= inst.x.symbols[static_cast<std::size_t>(k)];
            Eigen::VectorXd ch(4);
            for (int l = 0; l < 4; ++l) ch(l) = inst.params.tap_profile[static_cast<std::size_t>(l)];
            const Mat cov = a * ch.asDiagonal() * a.adjoint() +
                            inst.params.sigma_w_sq * Mat::Identity(64, 64);
            Vec yv(64);
            for (int k = 0; k < 64; ++k) yv(k) = inst.y.symbols[static_cast<std::size_t>(k)];
            const Vec oracle = ch.asDiagonal() * a.adjoint() * cov.ldlt().solve(yv);

            std::vector<cxd> oracle_taps(4);
            for (int l = 0; l < 4; ++l) oracle_taps[static_cast<std::size_t>(l)] = oracle(l);
            CHECK(rel_inf_dev(est_cir.taps, oracle_taps) < 1e-10);
        }
    }

    SUBCASE("all-zero profile with zero noise is a numerical failure") {
        Instance inst = make_instance(8, 2, 0.0, 26);
        auto params = inst.params;
        params.tap_profile = {0.0, 0.0};
        params.sigma_h_sq = 0.0;
        params.sigma_v_sq = 0.0;
        CHECK_THROWS_AS(est::mmse_cir_direct(inst.y, inst.x, params, mc), est::NumericalFailure);
    }
}

TEST_CASE("CR-MMSE SS-CIR estimator") {
    MultCounter mc;

    SUBCASE("zero prior variance kills the tap") {
        Instance inst = make_instance(64, 4, 0.1, 31);
        auto params = inst.params;
        params.tap_profile[2] = 0.0;
        params.sigma_h_sq = params.tap_profile[0] + params.tap_profile[1] + params.tap_profile[3];
        const Ctf shrunk = est::scalar_mmse_ctf(inst.y, inst.x, params, mc);
        const Cir cir = est::cr_mmse_cir(shrunk, params, 64, mc);
        CHECK(cir.taps[2] == cxd(0, 0));
    }

    SUBCASE("flat CTF single tap") {
        Ctf flat;
        flat.coeffs.assign(4, cxd(1, 0));
        auto params = est::make_params(0.0, {0.5}, 1, 0.0);
        const Cir cir = est::cr_mmse_cir(flat, params, 4, mc);
        CHECK(std::abs(cir.taps[0] - cxd(1, 0)) < 1e-14);
    }

    SUBCASE("partial-carrier CTF rejected") {
        Ctf partial;
        partial.coeffs.assign(32, cxd(1, 0));
        auto params = est::make_params(0.1, exponential_profile(4), 4);
        CHECK_THROWS_AS(est::cr_mmse_cir(partial, params, 64, mc), std::invalid_argument);
    }

    SUBCASE("equals the dense surrogate-model solve over 100 seeded instances") {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const Instance inst = make_instance(64, 4, 0.15, 1000 + seed);
            const Ctf shrunk = est::scalar_mmse_ctf(inst.y, inst.x, inst.params, mc);
            const Cir fast = est::cr_mmse_cir(shrunk, inst.params, 64, mc);

            // Eigen oracle on the surrogate model:
            // (C_h^{-1} + W^H W / sigma_v^2)^{-1} W^H h_mmse / sigma_v^2
            const Mat w = transform_matrix(64, 4);
            Eigen::VectorXd inv_ch(4);
            for (int l = 0; l < 4; ++l)
                inv_ch(l) = 1.0 / inst.params.tap_profile[static_cast<std::size_t>(l)];
            Vec hv(64);
            for (int k = 0; k < 64; ++k) hv(k) = shrunk.coeffs[static_cast<std::size_t>(k)];
            const Mat lhs = Mat(inv_ch.asDiagonal()) +
                            (w.adjoint() * w) / inst.params.sigma_v_sq;
            const Vec oracle = lhs.ldlt().solve(w.adjoint() * hv / inst.params.sigma_v_sq);

            std::vector<cxd> oracle_taps(4);
            for (int l = 0; l < 4; ++l) oracle_taps[static_cast<std::size_t>(l)] = oracle(l);
            worst = std::max(worst, rel_inf_dev(fast.taps, oracle_taps));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("CLS ML estimator") {
    MultCounter mc;

    SUBCASE("all carriers, noiseless: recovers the true taps") {
        const Instance inst = make_instance(64, 4, 0.0, 41);
        const Ctf ls = est::ls_ctf(inst.y, inst.x, mc);
        const Cir cir = est::ml_cir_cls(ls.coeffs, est::PilotPattern::all_carriers(), 4, mc);
        CHECK(rel_inf_dev(cir.taps, inst.cir.taps) < 1e-9);
    }

    SUBCASE("square system interpolates with zero residual") {
        Rng rng(42);
        std::normal_distribution<double> unit(0.0, 1.0);
        const int spacing = 16;
        const int nu = 4; // K = 64, N_h = N_u
        std::vector<cxd> pilots(static_cast<std::size_t>(nu));
        for (auto& v : pilots) v = cxd(unit(rng), unit(rng));
        const auto pattern = est::PilotPattern::comb(spacing);
        const Cir cir = est::ml_cir_cls(pilots, pattern, nu, mc);

        // residual at the comb teeth
        for (int j = 0; j < nu; ++j) {
            const int k = j * spacing;
            cxd model(0, 0);
            for (int l = 0; l < nu; ++l)
                model += cir.taps[static_cast<std::size_t>(l)] *
                         std::polar(1.0, -kTwoPi * static_cast<double>(k) * l / 64.0);
            CHECK(std::abs(model - pilots[static_cast<std::size_t>(j)]) < 1e-9);
        }
    }

    SUBCASE("matches the dense pseudo-inverse oracle") {
        Rng rng(43);
        std::normal_distribution<double> unit(0.0, 1.0);
        const int K = 64;
        const int nh = 4;
        for (int spacing : {2, 4}) {
            const int nu = K / spacing;
            std::vector<cxd> pilots(static_cast<std::size_t>(nu));
            for (auto& v : pilots) v = cxd(unit(rng), unit(rng));
            const auto pattern = est::PilotPattern::comb(spacing);
            const Cir cir = est::ml_cir_cls(pilots, pattern, nh, mc);

            Mat f(nu, nh);
            Vec r(nu);
            for (int j = 0; j < nu; ++j) {
                for (int l = 0; l < nh; ++l)
                    f(j, l) = std::polar(1.0, -kTwoPi * static_cast<double>(j * spacing) * l / K);
                r(j) = pilots[static_cast<std::size_t>(j)];
            }
            const Vec oracle = f.completeOrthogonalDecomposition().solve(r);
            std::vector<cxd> oracle_taps(static_cast<std::size_t>(nh));
            for (int l = 0; l < nh; ++l) oracle_taps[static_cast<std::size_t>(l)] = oracle(l);
            CHECK(rel_inf_dev(cir.taps, oracle_taps) < 1e-9);
        }
    }

    SUBCASE("rank deficiency rejected") {
        std::vector<cxd> pilots(3, cxd(1, 0));
        CHECK_THROWS_AS(est::ml_cir_cls(pilots, est::PilotPattern::all_carriers(), 4, mc),
                        std::invalid_argument);
    }
}

TEST_CASE("CR-ML estimator") {
    MultCounter mc;

    SUBCASE("all carriers, noiseless: exact recovery") {
        const Instance inst = make_instance(64, 4, 0.0, 51);
        const Ctf ls = est::ls_ctf(inst.y, inst.x, mc);
        const Cir cir = est::cr_ml_cir(ls.coeffs, est::PilotPattern::comb(1), 4, mc);
        CHECK(rel_inf_dev(cir.taps, inst.cir.taps) < 1e-9);
    }

    SUBCASE("equals CLS on regular combs, all spacings") {
        Rng rng(52);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (int spacing : {1, 2, 4, 8}) {
            const int nu = 64 / spacing;
            for (int t = 0; t < 25; ++t) {
                std::vector<cxd> pilots(static_cast<std::size_t>(nu));
                for (auto& v : pilots) v = cxd(unit(rng), unit(rng));
                const auto pattern = est::PilotPattern::comb(spacing);
                const Cir fast = est::cr_ml_cir(pilots, pattern, 4, mc);
                const Cir slow = est::ml_cir_cls(pilots, pattern, 4, mc);
                CHECK(rel_inf_dev(fast.taps, slow.taps) < 1e-9);
            }
        }
    }

    SUBCASE("shifted comb offset still matches CLS") {
        Rng rng(53);
        std::normal_distribution<double> unit(0.0, 1.0);
        const auto pattern = est::PilotPattern::comb(4, 1);
        std::vector<cxd> pilots(16);
        for (auto& v : pilots) v = cxd(unit(rng), unit(rng));
        const Cir fast = est::cr_ml_cir(pilots, pattern, 4, mc);
        const Cir slow = est::ml_cir_cls(pilots, pattern, 4, mc);
        CHECK(rel_inf_dev(fast.taps, slow.taps) < 1e-9);
    }
}

TEST_CASE("CTF from a short CIR") {
    MultCounter mc;

    SUBCASE("same contract as the zero-padded channel transform") {
        Rng rng(61);
        const Cir cir = generate_cir(exponential_profile(4), rng);
        const Ctf a = est::ctf_from_short_cir(cir, 64, mc);
        const Ctf b = cir_to_ctf(cir, 64, mc, TransformPath::zero_padded);
        CHECK(rel_inf_dev(a.coeffs, b.coeffs) < 1e-12);
    }

    SUBCASE("projection is idempotent") {
        Rng rng(62);
        std::normal_distribution<double> unit(0.0, 1.0);
        std::vector<cxd> h_ls(64);
        for (auto& v : h_ls) v = cxd(unit(rng), unit(rng));

        auto project = [&](const std::vector<cxd>& in) {
            const Cir cir = est::cr_ml_cir(in, est::PilotPattern::comb(1), 4, mc);
            return est::ctf_from_short_cir(cir, 64, mc).coeffs;
        };
        const auto once = project(h_ls);
        const auto twice = project(once);
        CHECK(rel_inf_dev(twice, once) < 1e-9);
    }

    SUBCASE("materialized projector has rank N_h") {
        const int K = 16;
        const int nh = 3;
        MultCounter scratch;
        Mat p(K, K);
        for (int col = 0; col < K; ++col) {
            std::vector<cxd> e(static_cast<std::size_t>(K), cxd(0, 0));
            e[static_cast<std::size_t>(col)] = cxd(1, 0);
            const Cir cir = est::cr_ml_cir(e, est::PilotPattern::comb(1), nh, scratch);
            const Ctf out = est::ctf_from_short_cir(cir, K, scratch);
            for (int row = 0; row < K; ++row) p(row, col) = out.coeffs[static_cast<std::size_t>(row)];
        }
        const Eigen::JacobiSVD<Mat> svd(p);
        int rank = 0;
        for (int i = 0; i < K; ++i)
            if (svd.singularValues()(i) > 0.5) ++rank;
        CHECK(rank == nh);
        CHECK(svd.singularValues()(nh) < 1e-9);
    }
}

TEST_CASE("LMMSE reference smoother") {
    MultCounter mc;
    const auto profile = exponential_profile(4);

    SUBCASE("huge noise shrinks the output to zero") {
        est::LmmseRef ref(profile, 64, 8, 1e12);
        Ctf ls;
        ls.coeffs.assign(64, cxd(1, 1));
        const Ctf out = ref.apply(ls, mc);
        for (const cxd& v : out.coeffs) CHECK(std::abs(v) < 1e-9);
    }

    SUBCASE("zero noise on a model-matched channel reproduces the projection") {
        Rng rng(71);
        const Cir cir = generate_cir(profile, rng);
        const Ctf h = cir_to_ctf(cir, 16, mc);
        est::LmmseRef ref(profile, 16, 4, 0.0);
        const Ctf out = ref.apply(h, mc);

        // eigendecomposition oracle at small K: projection onto the dominant
        // eigenvectors of the design correlation
        const Mat w = transform_matrix(16, 4);
        Eigen::VectorXd ch(4);
        for (int l = 0; l < 4; ++l) ch(l) = profile[static_cast<std::size_t>(l)];
        const Mat corr = w * ch.asDiagonal() * w.adjoint();
        Eigen::SelfAdjointEigenSolver<Mat> eig(corr);
        Mat u = eig.eigenvectors().rightCols(4); // 4 largest eigenvalues
        Vec hv(16);
        for (int k = 0; k < 16; ++k) hv(k) = h.coeffs[static_cast<std::size_t>(k)];
        const Vec proj = u * (u.adjoint() * hv);
        double dev = 0.0;
        for (int k = 0; k < 16; ++k)
            dev = std::max(dev, std::abs(out.coeffs[static_cast<std::size_t>(k)] - proj(k)));
        CHECK(dev < 1e-9);
    }

    SUBCASE("rank-deficient smoother leaves the out-of-space energy as a floor") {
        Rng rng(72);
        const Cir cir = generate_cir(profile, rng);
        const Ctf h = cir_to_ctf(cir, 16, mc);
        const int rank = 2;
        est::LmmseRef ref(profile, 16, rank, 0.0);
        const Ctf out = ref.apply(h, mc);

        double residual = 0.0;
        for (int k = 0; k < 16; ++k)
            residual += std::norm(out.coeffs[static_cast<std::size_t>(k)] -
                                  h.coeffs[static_cast<std::size_t>(k)]);
        // oracle: the floor is the energy of the discarded taps
        double outside = 0.0;
        for (int l = rank; l < 4; ++l)
            outside += 16.0 * std::norm(cir.taps[static_cast<std::size_t>(l)]);
        CHECK(residual == doctest::Approx(outside).epsilon(1e-9));
        CHECK(residual > 0.0);
    }
}

TEST_CASE("reduced-complexity paths never execute a linear solve") {
    MultCounter mc;
    const Instance inst = make_instance(64, 4, 0.1, 81);

    const auto before = est::solve_count();
    const Ctf shrunk = est::scalar_mmse_ctf(inst.y, inst.x, inst.params, mc);
    est::cr_mmse_cir(shrunk, inst.params, 64, mc);
    const Ctf ls = est::ls_ctf(inst.y, inst.x, mc);
    est::cr_ml_cir(ls.coeffs, est::PilotPattern::comb(4, 0),
                   4, mc);
    CHECK(est::solve_count() == before);

    est::mmse_cir_direct(inst.y, inst.x, inst.params, mc);
    CHECK(est::solve_count() == before + 1);
    est::ml_cir_cls(ls.coeffs, est::PilotPattern::all_carriers(), 4, mc);
    CHECK(est::solve_count() == before + 2);
}

TEST_CASE("complexity counter ordering at K=64, K0=N_h=4") {
    const Instance inst = make_instance(64, 4, 0.1, 82);

    MultCounter ls_cost;
    const Ctf ls = est::ls_ctf(inst.y, inst.x, ls_cost);

    MultCounter cr_mmse_cost;
    const Ctf shrunk = est::scalar_mmse_ctf(inst.y, inst.x, inst.params, cr_mmse_cost);
    est::cr_mmse_cir(shrunk, inst.params, 64, cr_mmse_cost);

    MultCounter direct_cost;
    est::mmse_cir_direct(inst.y, inst.x, inst.params, direct_cost);

    std::vector<cxd> comb_ls;
    for (int k = 0; k < 64; k += 4) comb_ls.push_back(ls.coeffs[static_cast<std::size_t>(k)]);
    MultCounter cls_comb_cost;
    est::ml_cir_cls(comb_ls, est::PilotPattern::comb(4), 4, cls_comb_cost);
    MultCounter cr_ml_cost;
    est::cr_ml_cir(comb_ls, est::PilotPattern::comb(4), 4, cr_ml_cost);

    CHECK(ls_cost.complex_mults <= cr_mmse_cost.complex_mults);
    CHECK(cr_mmse_cost.complex_mults <= 3 * ls_cost.complex_mults);
    CHECK(cr_mmse_cost.complex_mults < direct_cost.complex_mults);
    CHECK(cr_ml_cost.complex_mults < cls_comb_cost.complex_mults);
}

TEST_CASE("every estimator converges as the noise vanishes") {
    const Instance inst = make_instance(64, 4, 0.0, 83);
    auto params = est::make_params(1e-12, inst.cir.profile, 4);
    MultCounter mc;

    auto ctf_dev = [&](const Ctf& estimate) {
        return rel_inf_dev(estimate.coeffs, inst.ctf.coeffs);
    };

    const Ctf ls = est::ls_ctf(inst.y, inst.x, mc);
    CHECK(ctf_dev(ls) < 1e-5);
    CHECK(ctf_dev(est::scalar_mmse_ctf(inst.y, inst.x, params, mc)) < 1e-5);
    CHECK(ctf_dev(est::ctf_from_short_cir(est::mmse_cir_direct(inst.y, inst.x, params, mc), 64,
                                          mc)) < 1e-5);
    const Ctf shrunk = est::scalar_mmse_ctf(inst.y, inst.x, params, mc);
    CHECK(ctf_dev(est::ctf_from_short_cir(est::cr_mmse_cir(shrunk, params, 64, mc), 64, mc)) <
          1e-5);
    CHECK(ctf_dev(est::ctf_from_short_cir(
              est::ml_cir_cls(ls.coeffs, est::PilotPattern::all_carriers(), 4, mc), 64, mc)) <
          1e-5);
    CHECK(ctf_dev(est::ctf_from_short_cir(
              est::cr_ml_cir(ls.coeffs, est::PilotPattern::comb(1), 4, mc), 64, mc)) < 1e-5);
    CHECK(ctf_dev(est::lmmse_reference_ctf(ls, params, mc)) < 1e-5);
}

TEST_CASE("default sigma_v^2 follows the scalar-estimator residual") {
    const double sw = 0.3;
    const double sh = 1.0;
    const double shrink = 1.0 + sw / sh;
    CHECK(est::default_sigma_v_sq(sw, sh) == doctest::Approx(sw / (shrink * shrink)));
    CHECK(est::default_sigma_v_sq(0.0, sh) == 0.0);
}

TEST_CASE("mismatched sigma_H^2 is rejected") {
    auto params = est::make_params(0.1, exponential_profile(4), 4);
    params.sigma_h_sq = 2.0;
    MultCounter mc;
    Ctf flat;
    flat.coeffs.assign(64, cxd(1, 0));
    CHECK_THROWS_AS(est::cr_mmse_cir(flat, params, 64, mc), std::invalid_argument);
}
