#include "forge/cutoffs.hpp"

// header-only; TU anchors the target
namespace forge {}
