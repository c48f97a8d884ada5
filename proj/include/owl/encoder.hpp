#pragma once

#include <span>
#include <string>
#include <vector>

#include "owl/config.hpp"
#include "owl/goals.hpp"
#include "owl/types.hpp"

namespace owl {

struct EncodedObservation {
    std::vector<float> v;
};

// Sinusoidal positional encoding of one integer coordinate into 4 numbers,
// two frequency pairs with wavelengths 16 and 256 coordinate units.
void posenc4(double v, float* out);

// Turns the last K symbolic states into a fixed-size numeric vector.
// Per frame: each moving-object slot contributes 8 numbers (positional
// encodings of x and y), absent objects encode as coordinate -1, static
// objects are skipped; every abstract feature appears 4 times.
// Layout length = frame_stack * (8 * moving_slots + 4 * |goals|).
class ObservationEncoder {
  public:
    ObservationEncoder(const EnvConfig& cfg, const GoalSeq& goals);

    struct Slot {
        std::string type;
        int instance;
    };

    int frame_stack() const { return frame_stack_; }
    int per_frame() const { return 8 * static_cast<int>(slots_.size()) + 4 * goal_count_; }
    int dim() const { return frame_stack_ * per_frame(); }
    const std::vector<Slot>& slots() const { return slots_; }

    // history.size() must equal frame_stack; frames ordered oldest first.
    // Throws ConfigError if an object count exceeds its configured slot max.
    EncodedObservation encode(std::span<const SymbolicState> history) const;

    // Encodes one simulated state, replicated across the frame stack.
    // A missing full state encodes every slot as absent; kNone abstract
    // bits encode as -1.
    EncodedObservation encode_sim(const SymbolicState* full, const AbstractState& abs) const;

  private:
    void encode_frame(const SymbolicState* full, const AbstractState& abs, float* out) const;

    std::vector<Slot> slots_;
    GoalSeq goals_;
    int goal_count_;
    int frame_stack_;
};

// Rolling frame-stack history owned by a rollout worker.
class FrameHistory {
  public:
    explicit FrameHistory(int frame_stack) : k_(frame_stack) {}
    void reset(const SymbolicState& s) {
        frames_.assign(static_cast<size_t>(k_), s);
    }
    void push(const SymbolicState& s) {
        frames_.erase(frames_.begin());
        frames_.push_back(s);
    }
    std::span<const SymbolicState> frames() const { return frames_; }

  private:
    int k_;
    std::vector<SymbolicState> frames_;
};

}  // namespace owl
