#pragma once
// Generated by tools/gen_brief_pattern.py from data/brief_pattern_v1.txt. Do not edit.

#include <array>
#include <cstdint>

namespace dupscope {

struct BriefPair {
  std::int8_t x1, y1, x2, y2;
};

inline constexpr int kBriefPatternVersion = 1;

inline constexpr std::array<BriefPair, 256> kBriefPattern{{
    {11, 1, -4, 6},
    {1, 5, 5, -9},
    {4, 0, -5, 8},
    {-3, 3, 0, -4},
    {-3, -5, 3, 1},
    {-4, 8, 12, 3},
    {0, -4, -3, 11},
    {-4, -1, -6, -7},
    {0, 3, -1, -9},
    {-6, -1, -4, -2},
    {-3, -5, -5, 9},
    {-8, -4, 5, 6},
    {-4, 4, 2, 3},
    {1, -7, 5, -3},
    {6, 6, -1, -6},
    {-5, 0, -3, 8},
    {2, 7, 0, 4},
    {-7, -3, -7, -2},
    {0, 9, 8, 3},
    {-6, -3, 1, -7},
    {-2, -2, 7, 7},
    {-1, -5, -4, -1},
    {-5, -6, 8, 1},
    {-6, -4, 0, 13},
    {-9, 6, 2, -11},
    {-1, -6, 7, -2},
    {-6, -6, -5, 3},
    {3, 3, 11, -4},
    {-3, -1, -8, 4},
    {3, -3, -11, -2},
    {-3, 9, -3, 5},
    {0, 1, 0, 3},
    {-4, -4, 0, -5},
    {3, -5, -6, 6},
    {-8, 1, -4, -1},
    {2, 2, 2, -12},
    {-4, 8, -3, 5},
    {6, -6, 9, 6},
    {-2, -3, 4, 12},
    {8, -4, 6, 8},
    {1, 6, -8, -4},
    {2, -10, 2, 10},
    {8, 2, -4, 2},
    {-13, 0, -7, -8},
    {10, -1, -1, -3},
    {5, -12, -10, 2},
    {3, 10, 4, 1},
    {-2, -2, 4, 10},
    {7, 9, -2, -2},
    {2, 0, 0, -2},
    {5, 6, 4, -2},
    {3, 8, 3, -3},
    {9, 0, 3, 10},
    {-2, -6, -6, 3},
    {-3, -2, -8, 9},
    {1, -8, 2, 8},
    {-4, -5, 1, -4},
    {-2, -6, -6, -9},
    {1, -7, -1, 3},
    {3, -6, 4, -5},
    {1, 4, 2, 8},
    {3, 5, 9, -4},
    {-8, -1, 3, -10},
    {1, -3, -5, 4},
    {-2, -2, 1, -1},
    {-3, -6, -8, -1},
    {3, -5, 7, -4},
    {-3, 7, -5, 8},
    {-1, 4, -3, -12},
    {2, 8, 3, 8},
    {-5, 0, 5, -5},
    {-9, 4, -4, -6},
    {-4, 5, -1, -11},
    {-5, -11, -7, -1},
    {-3, 0, -2, 1},
    {-3, -9, 6, -5},
    {5, -5, -7, -9},
    {-4, -3, 1, -2},
    {10, -4, 5, -4},
    {4, 6, 2, -9},
    {2, 3, 11, -1},
    {11, 3, -7, 4},
    {2, 0, -7, -2},
    {6, 7, -4, 6},
    {-3, -4, 3, 2},
    {2, -9, 0, 7},
    {0, 0, 2, 1},
    {1, 6, 6, 0},
    {5, 8, 4, 6},
    {-4, 1, -2, 0},
    {3, 3, 1, 6},
    {1, -2, -9, 4},
    {5, 6, 8, -1},
    {-2, 5, 3, 6},
    {3, 4, 1, 3},
    {5, -8, -3, -2},
    {8, -4, 5, -11},
    {0, -6, 7, -5},
    {1, -1, -6, 1},
    {0, -1, -3, -12},
    {0, -7, 6, -3},
    {-3, 2, 2, 3},
    {-2, -12, 1, 0},
    {5, -2, -2, 5},
    {-4, 0, -2, -4},
    {3, 5, -5, -12},
    {-3, -5, 6, 10},
    {6, 10, 5, 10},
    {-4, -2, -6, -6},
    {-5, 3, -1, -1},
    {-9, -8, 3, 5},
    {3, 3, 7, 0},
    {5, -8, 10, 6},
    {0, 2, 1, 4},
    {6, -2, 2, -6},
    {0, -3, 5, 7},
    {-10, 4, 12, 1},
    {3, -7, -7, 4},
    {0, -2, 8, -5},
    {3, -3, 5, -3},
    {7, -3, -5, -2},
    {8, -5, 5, -6},
    {1, -4, -3, 3},
    {-3, 3, -2, -1},
    {-7, -2, 9, -9},
    {-8, 0, -6, -9},
    {-5, 0, -12, 2},
    {5, -9, 8, -9},
    {-5, 8, -3, 12},
    {5, 3, -4, -10},
    {5, 4, 4, -2},
    {2, -2, 2, 12},
    {12, 0, 3, 7},
    {-6, -4, -9, 1},
    {5, 5, -8, 2},
    {2, 7, -2, 7},
    {-2, -2, 3, -3},
    {7, 5, -9, 4},
    {-6, -5, 0, 10},
    {4, 5, -3, -2},
    {2, -9, -3, -8},
    {-3, -2, -3, -3},
    {-9, -3, -2, 3},
    {4, 2, 0, -1},
    {-3, 7, 10, 7},
    {3, -9, 3, 12},
    {-5, -9, -1, 2},
    {-3, -8, -3, 3},
    {5, -3, 2, -4},
    {-6, 2, 0, -2},
    {-3, -3, -10, 3},
    {-9, 8, 3, -3},
    {-1, 6, 8, 4},
    {8, 0, -2, 2},
    {-5, 10, -5, -9},
    {-3, 2, 5, 11},
    {3, -4, 10, -3},
    {0, 5, -4, -2},
    {9, 4, 4, -3},
    {-4, 10, 4, 10},
    {-9, -6, -3, -5},
    {-3, 1, -8, -1},
    {-1, -5, -6, -1},
    {-8, 0, 5, -12},
    {0, -6, 1, 4},
    {7, -10, 8, -9},
    {2, 7, -2, -4},
    {-1, 0, -2, 7},
    {5, -5, -1, 8},
    {3, 5, -2, -3},
    {-6, 2, 11, -6},
    {-5, -10, -10, 1},
    {0, 1, 8, 4},
    {0, 0, 0, -9},
    {-11, 4, 5, 4},
    {-1, -3, 4, -2},
    {3, -4, 6, -6},
    {3, 2, -3, 1},
    {-2, 2, -2, 11},
    {-4, 0, 1, 8},
    {-7, -6, 0, 2},
    {10, -4, 12, -1},
    {9, -6, 11, 2},
    {2, -5, 3, 3},
    {-12, -2, -2, -4},
    {0, 9, -5, -5},
    {5, -5, -1, 1},
    {0, 5, 9, 2},
    {-4, -1, 3, 2},
    {4, 3, -3, -2},
    {-1, -4, 10, 7},
    {-5, 3, 0, 12},
    {5, -4, 2, 2},
    {3, 4, 5, -5},
    {-2, 3, -3, 4},
    {-3, 8, -8, 4},
    {0, 2, -7, -2},
    {-6, -5, 2, 12},
    {-3, -5, 0, 3},
    {-4, 7, 0, -7},
    {-2, 0, 11, -5},
    {-7, 2, -4, -11},
    {-9, 0, -2, 2},
    {-5, 8, -8, -4},
    {-3, 9, -2, -8},
    {-3, 6, -4, 5},
    {-4, -7, 2, 1},
    {-11, 6, 3, 5},
    {4, -3, 7, -9},
    {6, 3, -11, 0},
    {12, -1, -8, -1},
    {-9, -4, 7, 6},
    {-3, 0, -6, -2},
    {5, -7, -3, 3},
    {-7, -5, -2, -1},
    {0, -2, -2, -8},
    {-3, 4, -5, -1},
    {-5, 6, 2, 5},
    {10, 7, -2, 11},
    {2, -4, 2, -1},
    {-9, 5, -5, -7},
    {-5, 0, 1, 3},
    {10, 2, 1, -1},
    {2, 3, -2, 10},
    {-1, -5, 8, 3},
    {0, 2, 5, -6},
    {5, 5, 6, 4},
    {1, -11, 4, -4},
    {2, 0, 1, 7},
    {-11, 4, 0, 1},
    {1, 0, 5, 4},
    {-6, 7, -10, -5},
    {1, 9, -1, -1},
    {6, 1, 1, -3},
    {-1, 4, -5, -1},
    {5, -3, -3, 11},
    {4, -5, 1, -11},
    {-9, -8, 3, -5},
    {6, -3, -1, -1},
    {2, 12, 6, 6},
    {10, 1, 4, -3},
    {-6, -11, 12, 3},
    {-2, 4, 4, -1},
    {0, 2, 5, 0},
    {8, 0, -7, 7},
    {2, -3, 11, -3},
    {7, -5, 6, -1},
    {-1, 7, 1, -5},
    {-1, -7, 4, -2},
    {-6, 3, -8, -3},
    {-10, 2, 3, 11},
    {9, 3, 3, 5},
    {-2, -2, 6, -9},
    {-7, 1, 9, 1},
    {0, 0, 1, -7},
    {-2, 2, -4, 2}
}};

}  // namespace dupscope
