#include "sgs/autodiff.hpp"

namespace sgs::ad {

namespace {
thread_local Tape* t_active = nullptr;
}

Tape* set_active_tape(Tape* t) {
    Tape* prev = t_active;
    t_active = t;
    return prev;
}

Tape* active_tape() { return t_active; }

}  // namespace sgs::ad
