#include "owl/encoder.hpp"

#include <cmath>

namespace owl {

void posenc4(double v, float* out) {
    constexpr double kTwoPi = 6.283185307179586;
    out[0] = static_cast<float>(std::sin(kTwoPi * v / 16.0));
    out[1] = static_cast<float>(std::cos(kTwoPi * v / 16.0));
    out[2] = static_cast<float>(std::sin(kTwoPi * v / 256.0));
    out[3] = static_cast<float>(std::cos(kTwoPi * v / 256.0));
}

ObservationEncoder::ObservationEncoder(const EnvConfig& cfg, const GoalSeq& goals)
    : goals_(goals), goal_count_(static_cast<int>(goals.size())), frame_stack_(cfg.frame_stack) {
    for (const auto& m : cfg.moving)
        for (int i = 0; i < m.max_count; ++i) slots_.push_back({m.type, i});
}

void ObservationEncoder::encode_frame(const SymbolicState* full, const AbstractState& abs,
                                      float* out) const {
    size_t k = 0;
    for (const auto& slot : slots_) {
        const GameObject* obj = full ? full->find(slot.type, slot.instance) : nullptr;
        double x = obj ? obj->x : -1.0;
        double y = obj ? obj->y : -1.0;
        posenc4(x, out + k);
        posenc4(y, out + k + 4);
        k += 8;
    }
    for (int8_t b : abs.bits) {
        float v = (b == kNone) ? -1.0f : static_cast<float>(b);
        for (int d = 0; d < 4; ++d) out[k++] = v;
    }
}

EncodedObservation ObservationEncoder::encode(std::span<const SymbolicState> history) const {
    if (static_cast<int>(history.size()) != frame_stack_)
        throw ConfigError("encode: history length != frame_stack");
    for (const auto& s : history) {
        for (const auto& slot : slots_) {
            if (slot.instance != 0) continue;
            int count = 0;
            for (const auto& o : s.objects)
                if (o.type == slot.type) ++count;
            int max = 0;
            for (const auto& sl : slots_)
                if (sl.type == slot.type) max = std::max(max, sl.instance + 1);
            if (count > max)
                throw ConfigError("encode: " + std::to_string(count) + " objects of type " +
                                  slot.type + " exceed slot max " + std::to_string(max));
        }
    }
    EncodedObservation obs;
    obs.v.resize(static_cast<size_t>(dim()));
    for (int f = 0; f < frame_stack_; ++f) {
        AbstractState abs = abstract_state(history[f], goals_);
        encode_frame(&history[f], abs, obs.v.data() + static_cast<size_t>(f) * per_frame());
    }
    return obs;
}

EncodedObservation ObservationEncoder::encode_sim(const SymbolicState* full,
                                                  const AbstractState& abs) const {
    EncodedObservation obs;
    obs.v.resize(static_cast<size_t>(dim()));
    for (int f = 0; f < frame_stack_; ++f)
        encode_frame(full, abs, obs.v.data() + static_cast<size_t>(f) * per_frame());
    return obs;
}

}  // namespace owl
