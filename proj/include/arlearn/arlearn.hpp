#pragma once

#include "arlearn/error.hpp"
#include "arlearn/rng.hpp"
#include "arlearn/numeric.hpp"
#include "arlearn/quadrature.hpp"
#include "arlearn/report.hpp"
#include "arlearn/marginal.hpp"
#include "arlearn/cdf.hpp"
#include "arlearn/orderstats.hpp"
#include "arlearn/revenue.hpp"
#include "arlearn/learner.hpp"
#include "arlearn/analysis.hpp"
#include "arlearn/experiment.hpp"
#include "arlearn/io.hpp"
#include "arlearn/suite.hpp"
