#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

// Minimal reverse-mode tape. The render/shading pipeline is written as
// templates over the scalar type; instantiating with ad::Var records the
// computation on a thread-local tape, and a single reverse sweep yields
// exact derivatives of the implemented forward math.
//
// Vars with index -1 are constants and are not tracked.

namespace sgs::ad {

struct Node {
    double pa, pb;
    int32_t ia, ib;
};

class Tape {
public:
    void clear() { nodes_.clear(); }
    size_t size() const { return nodes_.size(); }

    int push(int ia, double pa, int ib, double pb) {
        nodes_.push_back({pa, pb, ia, ib});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int leaf() { return push(-1, 0.0, -1, 0.0); }

    // Reverse sweep. `adj` must be size() long with output seeds placed at the
    // output nodes' indices; on return it holds adjoints for every node.
    void backward(std::vector<double>& adj) const {
        assert(adj.size() == nodes_.size());
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            const double a = adj[i];
            if (a == 0.0) continue;
            const Node& n = nodes_[i];
            if (n.ia >= 0) adj[n.ia] += n.pa * a;
            if (n.ib >= 0) adj[n.ib] += n.pb * a;
        }
    }

private:
    std::vector<Node> nodes_;
};

Tape* set_active_tape(Tape* t);
Tape* active_tape();

struct Var {
    double v = 0.0;
    int i = -1;

    Var() = default;
    Var(double c) : v(c), i(-1) {}  // constant, untracked
    Var(double value, int index) : v(value), i(index) {}

    static Var leaf(double value) { return Var(value, active_tape()->leaf()); }

    Var& operator+=(const Var& o) { *this = *this + o; return *this; }
    Var& operator-=(const Var& o) { *this = *this - o; return *this; }
    Var& operator*=(const Var& o) { *this = *this * o; return *this; }
    Var& operator/=(const Var& o) { *this = *this / o; return *this; }

    friend Var operator+(const Var& a, const Var& b) {
        if (a.i < 0 && b.i < 0) return Var(a.v + b.v);
        return Var(a.v + b.v, active_tape()->push(a.i, 1.0, b.i, 1.0));
    }
    friend Var operator-(const Var& a, const Var& b) {
        if (a.i < 0 && b.i < 0) return Var(a.v - b.v);
        return Var(a.v - b.v, active_tape()->push(a.i, 1.0, b.i, -1.0));
    }
    friend Var operator-(const Var& a) {
        if (a.i < 0) return Var(-a.v);
        return Var(-a.v, active_tape()->push(a.i, -1.0, -1, 0.0));
    }
    friend Var operator*(const Var& a, const Var& b) {
        if (a.i < 0 && b.i < 0) return Var(a.v * b.v);
        return Var(a.v * b.v, active_tape()->push(a.i, b.v, b.i, a.v));
    }
    friend Var operator/(const Var& a, const Var& b) {
        if (a.i < 0 && b.i < 0) return Var(a.v / b.v);
        const double inv = 1.0 / b.v;
        return Var(a.v * inv, active_tape()->push(a.i, inv, b.i, -a.v * inv * inv));
    }

    friend bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
    friend bool operator>(const Var& a, const Var& b) { return a.v > b.v; }
    friend bool operator<=(const Var& a, const Var& b) { return a.v <= b.v; }
    friend bool operator>=(const Var& a, const Var& b) { return a.v >= b.v; }
};

inline double val(double x) { return x; }
inline double val(const Var& x) { return x.v; }

inline Var exp(const Var& a) {
    const double e = std::exp(a.v);
    if (a.i < 0) return Var(e);
    return Var(e, active_tape()->push(a.i, e, -1, 0.0));
}

inline Var log(const Var& a) {
    if (a.i < 0) return Var(std::log(a.v));
    return Var(std::log(a.v), active_tape()->push(a.i, 1.0 / a.v, -1, 0.0));
}

inline Var sqrt(const Var& a) {
    const double s = std::sqrt(a.v);
    if (a.i < 0) return Var(s);
    return Var(s, active_tape()->push(a.i, 0.5 / s, -1, 0.0));
}

inline Var pow(const Var& a, double p) {
    const double r = std::pow(a.v, p);
    if (a.i < 0) return Var(r);
    return Var(r, active_tape()->push(a.i, p * std::pow(a.v, p - 1.0), -1, 0.0));
}

inline Var sin(const Var& a) {
    if (a.i < 0) return Var(std::sin(a.v));
    return Var(std::sin(a.v), active_tape()->push(a.i, std::cos(a.v), -1, 0.0));
}

inline Var cos(const Var& a) {
    if (a.i < 0) return Var(std::cos(a.v));
    return Var(std::cos(a.v), active_tape()->push(a.i, -std::sin(a.v), -1, 0.0));
}

// Input clamped slightly inside [-1, 1]; the derivative blows up at the poles.
inline Var acos(const Var& a) {
    const double c = a.v < -1.0 + 1e-12 ? -1.0 + 1e-12 : (a.v > 1.0 - 1e-12 ? 1.0 - 1e-12 : a.v);
    const double r = std::acos(c);
    if (a.i < 0) return Var(r);
    return Var(r, active_tape()->push(a.i, -1.0 / std::sqrt(1.0 - c * c), -1, 0.0));
}

inline Var atan2(const Var& y, const Var& x) {
    const double r = std::atan2(y.v, x.v);
    if (y.i < 0 && x.i < 0) return Var(r);
    const double d = x.v * x.v + y.v * y.v;
    return Var(r, active_tape()->push(y.i, x.v / d, x.i, -y.v / d));
}

inline Var sigmoid(const Var& a) {
    double s;
    if (a.v >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-a.v));
    } else {
        const double e = std::exp(a.v);
        s = e / (1.0 + e);
    }
    if (a.i < 0) return Var(s);
    return Var(s, active_tape()->push(a.i, s * (1.0 - s), -1, 0.0));
}

// Branch subgradients: max/min pick the active side.
inline Var max(const Var& a, const Var& b) { return a.v >= b.v ? a : b; }
inline Var min(const Var& a, const Var& b) { return a.v <= b.v ? a : b; }
inline Var clamp(const Var& v, double lo, double hi) {
    if (v.v < lo) return Var(lo);
    if (v.v > hi) return Var(hi);
    return v;
}

inline Var abs(const Var& a) { return a.v >= 0.0 ? a : -a; }

}  // namespace sgs::ad
