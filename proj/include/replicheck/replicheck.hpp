#pragma once

#include "replicheck/anova.hpp"
#include "replicheck/csv.hpp"
#include "replicheck/domain.hpp"
#include "replicheck/effects.hpp"
#include "replicheck/errors.hpp"
#include "replicheck/linmodel.hpp"
#include "replicheck/report.hpp"
#include "replicheck/rng.hpp"
#include "replicheck/sim.hpp"
#include "replicheck/special.hpp"
#include "replicheck/svg.hpp"
#include "replicheck/version.hpp"
