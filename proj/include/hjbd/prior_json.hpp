#pragma once

#include <cstddef>
#include <string>

#include "hjbd/priors.hpp"

namespace hjbd {

// Parses {"kind": ..., parameters...}. default_dim fills "dim" when the
// descriptor leaves it out (0 means "required").
Prior prior_from_json(const std::string& text, std::size_t default_dim = 0);

std::string prior_to_json(const Prior& prior);

}  // namespace hjbd
