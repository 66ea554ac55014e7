#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sgs/autodiff.hpp"
#include "sgs/math.hpp"

using namespace sgs;

namespace {

// Central finite difference of f at x.
template <class F>
std::vector<double> fd_grad(const F& f, std::vector<double> x, double h = 1e-6) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

template <class F>
std::vector<double> tape_grad(const F& f, const std::vector<double>& x, double& value) {
    ad::Tape tape;
    ad::Tape* prev = ad::set_active_tape(&tape);
    std::vector<ad::Var> vars;
    for (double v : x) vars.push_back(ad::Var::leaf(v));
    const ad::Var out = f(vars);
    ad::set_active_tape(prev);
    value = out.v;

    std::vector<double> adj(tape.size(), 0.0);
    adj[out.i] = 1.0;
    tape.backward(adj);
    std::vector<double> g;
    for (const auto& v : vars) g.push_back(adj[v.i]);
    return g;
}

}  // namespace

TEST_CASE("tape gradients match finite differences on a composite expression") {
    auto expr = [](const auto& v) {
        using T = std::decay_t<decltype(v[0])>;
        using std::exp;
        using std::log;
        using std::sqrt;
        T a = v[0] * v[1] + exp(v[2] * T(0.5));
        T b = log(v[0] + T(3.0)) / (v[1] * v[1] + T(1.0));
        T c = sqrt(a * a + b * b + T(0.1));
        return a * b - c + v[2] / v[0];
    };
    auto expr_d = [&](const std::vector<double>& v) { return expr(v); };

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.3, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x{dist(rng), dist(rng), dist(rng)};
        double value;
        const auto ga = tape_grad(expr, x, value);
        const auto gf = fd_grad(expr_d, x);
        CHECK(value == doctest::Approx(expr_d(x)));
        for (size_t i = 0; i < x.size(); ++i)
            CHECK(ga[i] == doctest::Approx(gf[i]).epsilon(1e-6));
    }
}

TEST_CASE("tape handles trig, sigmoid and branches") {
    auto expr = [](const auto& v) {
        using T = std::decay_t<decltype(v[0])>;
        using std::atan2;
        using std::acos;
        using std::cos;
        using std::max;
        using std::sin;
        T a = atan2(v[0], v[1]);
        T b = acos(v[2] * T(0.3));
        T s = sigmoid(v[0] * v[1]);
        T m = max(v[0], v[1] * T(1.3));
        return a * b + s * m + sin(v[2]) * cos(v[0]);
    };
    // double instantiation needs the same names visible
    auto expr_d = [&](const std::vector<double>& v) { return expr(v); };

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.2, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x{dist(rng), dist(rng), dist(rng)};
        double value;
        const auto ga = tape_grad(expr, x, value);
        const auto gf = fd_grad(expr_d, x);
        for (size_t i = 0; i < x.size(); ++i)
            CHECK(ga[i] == doctest::Approx(gf[i]).epsilon(1e-6));
    }
}

TEST_CASE("constants do not grow the tape") {
    ad::Tape tape;
    ad::Tape* prev = ad::set_active_tape(&tape);
    ad::Var c(2.0);
    ad::Var d = c * ad::Var(3.0) + ad::Var(1.0);
    CHECK(tape.size() == 0);
    CHECK(d.v == doctest::Approx(7.0));
    ad::set_active_tape(prev);
}

TEST_CASE("adjoints accumulate across shared subexpressions") {
    ad::Tape tape;
    ad::Tape* prev = ad::set_active_tape(&tape);
    ad::Var x = ad::Var::leaf(1.5);
    ad::Var y = x * x + x * ad::Var(2.0);  // d/dx = 2x + 2
    ad::set_active_tape(prev);
    std::vector<double> adj(tape.size(), 0.0);
    adj[y.i] = 1.0;
    tape.backward(adj);
    CHECK(adj[x.i] == doctest::Approx(5.0));
}
