#ifndef CHOOSIOW_CHOOSIOW_HPP
#define CHOOSIOW_CHOOSIOW_HPP

#include "choosiow/choice.hpp"
#include "choosiow/market.hpp"
#include "choosiow/solver.hpp"
#include "choosiow/statics.hpp"

#endif  // CHOOSIOW_CHOOSIOW_HPP
