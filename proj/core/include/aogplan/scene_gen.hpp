#pragma once

#include "aogplan/rng.hpp"
#include "aogplan/scene.hpp"

namespace aogplan::world {

// Presence probability of one object class in one environment.
double presence_prob(Environment env, int class_id);

// Draws a scene from the per-environment catalog: at most one instance per
// class, states from per-class priors, non-degenerate bboxes inside the unit
// square. Deterministic given the rng state. The produced scene always holds
// at least one object.
Scene generate_scene(Rng& rng, Environment env,
                     const SceneLayout& layout = SceneLayout{});

// Draws the attribute states and bbox for a newly placed instance; shared
// with the dataset builder when it injects task-required objects.
ObjectInstance draw_instance(Rng& rng, int class_id);

}  // namespace aogplan::world
