#!/usr/bin/env python3
"""Generates the steered-BRIEF sampling pattern (data file + C++ header).

Points are drawn from an isotropic Gaussian with sigma = patch_size / 5 and
rejected outside a disc of radius 13, so every rotated sample stays inside the
31x31 patch. Re-running with the same version/seed reproduces the files exactly.
"""
import math
import pathlib
import random

VERSION = 1
SEED = 0x0B51EF
PATCH_SIZE = 31
MAX_RADIUS = 13
PAIRS = 256

root = pathlib.Path(__file__).resolve().parent.parent
rng = random.Random(SEED)


def sample_point():
    while True:
        x = round(rng.gauss(0.0, PATCH_SIZE / 5.0))
        y = round(rng.gauss(0.0, PATCH_SIZE / 5.0))
        if math.hypot(x, y) <= MAX_RADIUS:
            return x, y


pairs = []
while len(pairs) < PAIRS:
    a, b = sample_point(), sample_point()
    if a != b:
        pairs.append((*a, *b))

lines = [f"# steered BRIEF pattern v{VERSION}: {PAIRS} pairs, columns x1 y1 x2 y2 (signed byte offsets)"]
lines += [" ".join(str(v) for v in p) for p in pairs]
(root / "data" / f"brief_pattern_v{VERSION}.txt").write_text("\n".join(lines) + "\n")

rows = ",\n".join("    {%d, %d, %d, %d}" % p for p in pairs)
header = f"""#pragma once
// Generated by tools/gen_brief_pattern.py from data/brief_pattern_v{VERSION}.txt. Do not edit.

#include <array>
#include <cstdint>

namespace dupscope {{

struct BriefPair {{
  std::int8_t x1, y1, x2, y2;
}};

inline constexpr int kBriefPatternVersion = {VERSION};

inline constexpr std::array<BriefPair, {PAIRS}> kBriefPattern{{{{
{rows}
}}}};

}}  // namespace dupscope
"""
(root / "include" / "dupscope" / "brief_pattern.hpp").write_text(header)
