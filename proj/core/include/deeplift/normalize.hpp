#pragma once

#include "deeplift/graph.hpp"

namespace deeplift {

// Shifts each input's weights in the Affine layer feeding the final Softmax by their mean
// over classes. Softmax outputs are unchanged; a feature weighted equally for every class
// ends up with zero multiplier to each class pre-activation.
// Throws GraphError when the first output is not Softmax(Affine(...)).
Graph mean_normalize_softmax_weights(const Graph& graph);

// For every constraint group (inputs summing to c), replaces the consuming layer's weights
// w by w - mu and its bias b by b + c * mu, mu being the mean weight over the group.
// Outputs are unchanged on inputs that satisfy the constraints. Affine consumers accept any
// groups; Conv1D consumers need one group per input row with a common channel set.
// Throws GraphError when a constrained node feeds a layer without input weights.
Graph normalize_constrained_weights(const Graph& graph);

}  // namespace deeplift
