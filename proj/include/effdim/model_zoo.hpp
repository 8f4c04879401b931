#pragma once

#include <string>

#include "effdim/network.hpp"

namespace effdim {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// hidden width / channel plan derived from the multiplier
int scaled_width(int base, double width_multiplier);

Network build_model(const ModelSpec& spec);
std::size_t param_count(const Network& net);

// closed-form parameter counts, used for monotonicity checks without building
std::size_t param_count_for(const ModelSpec& spec);

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// versioned binary checkpoint; round-trip is bit-exact
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace effdim
