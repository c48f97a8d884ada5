#include "owl/config.hpp"

namespace owl {

// Reference desk-scale environment: three 20x15-cell rooms connected by side
// portals, six ordered touch goals forming a stepping-stone chain from the
// spawn room into the right room. Interior walls keep blind random walks
// from reaching the goals so mastery requires learned behavior. Room 0 is
// kept empty as the novel start area for the zero-shot experiment.
static const char* kChain6 = R"(name chain6
cell_size 8
actions NOOP UP DOWN LEFT RIGHT
episode_timeout 1000
action_slip 0.0
frame_stack 4
moving player 1
moving roomnumber 1
moving enemy 1

room 0
####################
#..................#
#..................#
#..................#
#..................#
#..................#
#..................>
#..................>
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
####################

room 1
####################
#..................#
#..................#
#......#...........#
#......#...........#
#......#...........#
<......#...........>
<......#...........>
#......#...........#
#......####........#
#..................#
#..................#
#..................#
#..................#
####################

room 2
####################
#..................#
#..................#
#.........#........#
#.........#........#
#.........#........#
<.........#........#
<.........#........#
#.........#........#
#.........####.....#
#..................#
#..................#
#..................#
#..................#
####################

spawn 1 2 13

object homepad 1 12 4
object pad_a 1 17 11
object pad_b 1 17 6
object pad_c 2 3 10
object key 2 8 13
object door 2 15 3

goal homepad homepad 1
goal pad_a pad_a 1
goal pad_b pad_b 1
goal pad_c pad_c 2
goal key key 2
goal door door 2
)";

// Single-room layout matching the smallest observation example: one player
// plus up to two enemies, no goals, so a single frame encodes to 24 numbers.
static const char* kRoom1 = R"(name room1
cell_size 8
actions NOOP UP DOWN LEFT RIGHT
episode_timeout 1000
action_slip 0.0
frame_stack 1
moving player 1
moving enemy 2

room 0
####################
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
#..................#
####################

spawn 0 2 13
enemy 0 10 5 h 4 15
)";

// One room, one goal behind a wall; the smallest trainable setup.
static const char* kMini = R"(name mini
cell_size 8
actions NOOP UP DOWN LEFT RIGHT
episode_timeout 1000
action_slip 0.0
frame_stack 4
moving player 1
moving roomnumber 1
moving enemy 1

room 0
####################
#..................#
#..................#
#......#...........#
#......#...........#
#......#...........#
#......#...........#
#......#...........#
#......####........#
#..................#
#..................#
#..................#
#..................#
#..................#
####################

spawn 0 2 13
object pad_a 0 12 5
goal pad_a pad_a 0
)";

// Stochastic variant with patrolling enemies, used by environment tests.
static const char* kPatrol = R"(name patrol
cell_size 8
actions NOOP UP DOWN LEFT RIGHT
episode_timeout 200
action_slip 0.1
frame_stack 2
moving player 1
moving roomnumber 1
moving enemy 1

room 0
####################
#..................#
#..................#
#..................#
#..................#
#..................#
#..................>
#..................>
#..................#
####################

room 1
####################
#..................#
#..................#
#..................#
#..................#
#..................#
<..................#
<..................#
#..................#
####################

spawn 0 2 7
object pad_a 1 5 3
goal pad_a pad_a 1
enemy 0 10 4 h 4 15
enemy 1 8 2 v 1 7
)";

const std::map<std::string, std::string>& builtin_configs() {
    static const std::map<std::string, std::string> m = {
        {"chain6", kChain6},
        {"room1", kRoom1},
        {"mini", kMini},
        {"patrol", kPatrol},
    };
    return m;
}

}  // namespace owl
