#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace owl {

// Raised on malformed configs / user input; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One object in a symbolic state. Coordinates and extents are in pixels
// (cells scaled by the config's cell size). Static objects never move and
// are skipped by the observation encoder.
struct GameObject {
    std::string type;
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    bool is_static = false;
};

// The full MDP state: an ordered object list (type-major, then instance
// slot) plus the room index, which mirrors the roomnumber object.
struct SymbolicState {
    std::vector<GameObject> objects;
    int room = 0;

    const GameObject* find(const std::string& type, int instance = 0) const {
        int seen = 0;
        for (const auto& o : objects) {
            if (o.type == type) {
                if (seen == instance) return &o;
                ++seen;
            }
        }
        return nullptr;
    }
};

// Half-open box overlap: boxes sharing only an edge do not touch.
inline bool boxes_overlap(const GameObject& a, const GameObject& b) {
    return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

// splitmix64, used to derive independent per-component seeds from one
// master seed so that unrelated subsystems never share an RNG stream.
inline uint64_t split_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    // uniform integer in [0, n)
    int uniform_int(int n) {
        return static_cast<int>(gen_() % static_cast<uint64_t>(n));
    }
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }
    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }
    std::mt19937_64& raw() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace owl
