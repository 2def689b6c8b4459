#pragma once

#include "shiftlab/characterize.hpp"
#include "shiftlab/construct.hpp"
#include "shiftlab/errors.hpp"
#include "shiftlab/integer_set.hpp"
#include "shiftlab/rational.hpp"
#include "shiftlab/recurrence.hpp"
#include "shiftlab/separate.hpp"
#include "shiftlab/shift.hpp"
#include "shiftlab/space.hpp"
#include "shiftlab/weight_sequence.hpp"
