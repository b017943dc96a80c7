#pragma once

#include "embezzle/analysis.hpp"
#include "embezzle/compensated_sum.hpp"
#include "embezzle/families.hpp"
#include "embezzle/fidelity.hpp"
#include "embezzle/fitting.hpp"
#include "embezzle/parallel.hpp"
#include "embezzle/protocol.hpp"
#include "embezzle/target.hpp"
