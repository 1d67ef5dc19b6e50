#include "forge/grid.hpp"

// TorusGrid is header-only; this TU anchors the target.
namespace forge {}
