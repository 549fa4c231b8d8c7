#pragma once

// Optimal block designs for comparing test treatments with a control:
// construction, criterion evaluation, condition verification, and
// exhaustive exact-arithmetic certification at desk scale.

#include "tcdesign/constructors.hpp"
#include "tcdesign/criteria.hpp"
#include "tcdesign/design.hpp"
#include "tcdesign/errors.hpp"
#include "tcdesign/info_matrix.hpp"
#include "tcdesign/io.hpp"
#include "tcdesign/matrix.hpp"
#include "tcdesign/oracle.hpp"
#include "tcdesign/rational.hpp"
