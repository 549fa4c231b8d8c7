#pragma once

#include "tcdesign/tcdesign.hpp"

namespace tcdesign::testing {

// v=2, unequal blocks m=(2,2,4): half of every block on the control,
// tests equireplicated.
inline ExactDesign unequal_blocks_v2() {
  return ExactDesign({2, 2, 4}, Matrix<Count>(3, 3, {1, 1, 2, 1, 0, 1, 0, 1, 1}));
}

// v=4, q=4: control twice per block, all control-test concurrences 4.
inline ExactDesign balanced_control_v4() {
  return ExactDesign({4, 4, 4, 4}, Matrix<Count>(5, 4,
                                                 {2, 2, 2, 2,
                                                  1, 0, 0, 1,
                                                  1, 1, 0, 0,
                                                  0, 1, 1, 0,
                                                  0, 0, 1, 1}));
}

// v=3, q=3: a BIBD on the test treatments with the control added to
// every block; blocks {0,1,2}, {0,2,3}, {0,1,3}.
inline ExactDesign bibd_plus_control_v3() {
  return ExactDesign({3, 3, 3}, Matrix<Count>(4, 3,
                                              {1, 1, 1,
                                               1, 0, 1,
                                               1, 1, 0,
                                               0, 1, 1}));
}

// v=2, q=2: the two-block design [[1,1],[1,0],[0,1]].
inline ExactDesign two_block_v2() {
  return ExactDesign({2, 2}, Matrix<Count>(3, 2, {1, 1, 1, 0, 0, 1}));
}

}  // namespace tcdesign::testing
