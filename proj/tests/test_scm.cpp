#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corecd/scm.hpp"

using namespace corecd;

namespace {

Dag dag_from_edges(int n, std::initializer_list<std::pair<int, int>> edges) {
    Dag g(n);
    for (auto [i, j] : edges) g.set_edge(i, j, true);
    return g;
}

} // namespace

TEST_CASE("sample_scm draws weights in bounds") {
    Rng rng(11);
    const Dag g = dag_from_edges(4, {{3, 2}, {0, 2}, {1, 3}});
    FunctionClass fc;
    const Scm m = sample_scm(g, fc, rng);

    CHECK(m.parents[2] == std::vector<int>{0, 3});
    CHECK(m.weights[2].size() == 2);
    CHECK(m.weights[3].size() == 1);
    CHECK(m.weights[0].empty());
    for (const auto& node_weights : m.weights)
        for (double w : node_weights) {
            CHECK(w >= 0.5);
            CHECK(w <= 2.0);
        }

    SUBCASE("empty graph gives the root-default vector") {
        const Scm roots = sample_scm(Dag(3), fc, rng);
        Rng obs_rng(1);
        CHECK(sample_observation(roots, obs_rng) == std::vector<double>{0.0, 0.0, 0.0});
    }

    SUBCASE("deterministic given rng state") {
        Rng a(5), b(5);
        const Scm ma = sample_scm(g, fc, a);
        const Scm mb = sample_scm(g, fc, b);
        CHECK(ma.weights == mb.weights);
    }

    SUBCASE("cyclic graph is rejected") {
        Dag cyc(2);
        cyc.set_edge(0, 1, true);
        cyc.set_edge(1, 0, true);
        CHECK_THROWS_AS(sample_scm(cyc, fc, rng), ValidationError);
    }
}

TEST_CASE("eq7 preset evaluates as printed under do(X_3=20)") {
    Scm m = scm_preset("eq7");
    CHECK(m.parents[0] == std::vector<int>{1, 3, 4});
    CHECK(m.weights[0].size() == 3);

    apply_intervention(m, 3, 20.0);
    Rng rng(0);
    const std::vector<double> x = sample_observation(m, rng);
    CHECK(x[0] == doctest::Approx(60.72608).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(78.752).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(27.6).epsilon(1e-12));
    CHECK(x[3] == 20.0);
    CHECK(x[4] == 0.0);
}

TEST_CASE("interventions replace each other and clear") {
    Rng rng(3);
    const Dag g = dag_from_edges(3, {{0, 1}, {1, 2}});
    Scm m = sample_scm(g, FunctionClass{}, rng);

    apply_intervention(m, 0, 20.0);
    apply_intervention(m, 2, 20.0);
    REQUIRE(m.intervention.has_value());
    CHECK(m.intervention->target == 2);

    SUBCASE("induced graph loses the target's incoming edges") {
        const Dag induced = induced_graph(m);
        CHECK_FALSE(induced.edge(1, 2));
        CHECK(induced.edge(0, 1));
    }

    SUBCASE("clear restores the observational graph") {
        clear_intervention(m);
        CHECK(induced_graph(m) == g);
        CHECK_FALSE(m.intervention.has_value());
    }

    SUBCASE("do on a root changes nothing structurally") {
        apply_intervention(m, 0, 20.0);
        CHECK(induced_graph(m) == g);
    }

    SUBCASE("out-of-range target") {
        CHECK_THROWS_AS(apply_intervention(m, 3, 20.0), IndexError);
        CHECK_THROWS_AS(apply_intervention(m, -1, 20.0), IndexError);
    }
}

TEST_CASE("eq8 preset: do(X_2) removes exactly its three incoming edges") {
    Scm m = scm_preset("eq8");
    apply_intervention(m, 2, 5.0);
    const Dag induced = induced_graph(m);
    CHECK_FALSE(induced.edge(1, 2));
    CHECK_FALSE(induced.edge(3, 2));
    CHECK_FALSE(induced.edge(4, 2));
    CHECK(shd(induced, m.graph) == 3);
}

TEST_CASE("clamp is exact for every function class") {
    const FnTag tags[] = {FnTag::kLinear, FnTag::kLinearNoise, FnTag::kInteraction};
    Rng rng(17);
    for (FnTag tag : tags) {
        FunctionClass fc;
        fc.tag = tag;
        for (int rep = 0; rep < 1000; ++rep) {
            const Dag g = generate_er_dag(5, 0.4, rng);
            Scm m = sample_scm(g, fc, rng);
            const int target = static_cast<int>(rng.uniform_below(5));
            apply_intervention(m, target, 20.0);
            const std::vector<double> x = sample_observation(m, rng);
            CHECK(x[target] == 20.0);
        }
    }
}

TEST_CASE("linear class: observation is deterministic and zero without intervention") {
    Rng rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const Dag g = generate_er_dag(4, 0.5, rng);
        const Scm m = sample_scm(g, FunctionClass{}, rng);
        Rng a(1), b(999);
        const auto xa = sample_observation(m, a);
        const auto xb = sample_observation(m, b);
        CHECK(xa == xb);
        for (double v : xa) CHECK(v == 0.0);
    }
}

TEST_CASE("observation sampling is a pure function of the rng state") {
    FunctionClass fc;
    fc.tag = FnTag::kLinearNoise;
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const Dag g = generate_er_dag(4, 0.5, rng);
        Scm m = sample_scm(g, fc, rng);
        if (rep % 2 == 0) apply_intervention(m, rep % 4, 20.0);
        Rng a(rep + 100), b(rep + 100);
        CHECK(sample_observation(m, a) == sample_observation(m, b));
    }
}

TEST_CASE("linear_noise adds per-node variance") {
    FunctionClass fc;
    fc.tag = FnTag::kLinearNoise;
    fc.noise_std_sq = 0.5;

    Rng rng(31);
    const Scm m = sample_scm(Dag(2), fc, rng);
    Rng obs_rng(77);
    double sum = 0.0, sum_sq = 0.0;
    const int samples = 20000;
    for (int k = 0; k < samples; ++k) {
        const auto x = sample_observation(m, obs_rng);
        sum += x[0];
        sum_sq += x[0] * x[0];
    }
    const double mean = sum / samples;
    const double var = sum_sq / samples - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(0.5).epsilon(0.05));

    SUBCASE("no noise lands on an intervened node") {
        Scm clamped = m;
        apply_intervention(clamped, 0, 20.0);
        for (int k = 0; k < 100; ++k) CHECK(sample_observation(clamped, obs_rng)[0] == 20.0);
    }
}

TEST_CASE("interaction class") {
    FunctionClass fc;
    fc.tag = FnTag::kInteraction;
    Rng rng(41);

    SUBCASE("pair drawn among distinct parents when >= 2 parents") {
        const Dag g = dag_from_edges(4, {{0, 3}, {1, 3}, {2, 3}});
        for (int rep = 0; rep < 200; ++rep) {
            const Scm m = sample_scm(g, fc, rng);
            const auto [a, b] = m.interaction_pair[3];
            CHECK(a != b);
            CHECK(a >= 0);
            CHECK(a < b);
            CHECK(g.edge(a, 3));
            CHECK(g.edge(b, 3));
        }
    }

    SUBCASE("single-parent nodes fall back to the linear form") {
        const Dag g = dag_from_edges(2, {{0, 1}});
        const Scm m = sample_scm(g, fc, rng);
        CHECK(m.interaction_pair[1][0] == -1);
        CHECK(eval_function(m, 1, std::vector<double>{2.0}) ==
              doctest::Approx(2.0 * m.weights[1][0]));
    }

    SUBCASE("zero parent values give zero output") {
        const Dag g = dag_from_edges(3, {{0, 2}, {1, 2}});
        for (int rep = 0; rep < 100; ++rep) {
            const Scm m = sample_scm(g, fc, rng);
            CHECK(eval_function(m, 2, std::vector<double>{0.0, 0.0}) == 0.0);
        }
    }

    SUBCASE("interaction term multiplies the chosen pair") {
        const Dag g = dag_from_edges(3, {{0, 2}, {1, 2}});
        const Scm m = sample_scm(g, fc, rng);
        const double x0 = 2.0, x1 = 3.0;
        const double expected = m.weights[2][0] * x0 + m.weights[2][1] * x1 + x0 * x1;
        CHECK(eval_function(m, 2, std::vector<double>{x0, x1}) == doctest::Approx(expected));
    }
}

TEST_CASE("format_scm prints one equation per node") {
    const Scm m = scm_preset("eq7");
    const std::string text = format_scm(m);
    CHECK(text.find("X_0 <- 0.54*X_1 + 0.91*X_3 + 0.83*X_4") != std::string::npos);
    CHECK(text.find("X_3 <- 0") != std::string::npos);
    CHECK_THROWS_AS(scm_preset("nope"), ConfigError);
}

TEST_CASE("make_scm validates weight shapes") {
    const Dag g = dag_from_edges(2, {{0, 1}});
    CHECK_THROWS_AS(make_scm(g, FunctionClass{}, {{}, {0.5, 0.5}}), DimensionError);
    CHECK_THROWS_AS(make_scm(g, FunctionClass{}, {{}}), DimensionError);
}
