#!/usr/bin/env python3
"""Embeds data/lexicon_v1.tsv into include/dupscope/lexicon_data.hpp."""
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
text = (root / "data" / "lexicon_v1.tsv").read_text(encoding="utf-8")
out = root / "include" / "dupscope" / "lexicon_data.hpp"
out.write_text(
    "#pragma once\n\n"
    "// Generated by tools/gen_lexicon.py from data/lexicon_v1.tsv. Do not edit.\n\n"
    "namespace dupscope {\n\n"
    "inline constexpr int kLexiconVersion = 1;\n\n"
    f'inline constexpr const char* kBundledLexicon = R"LEX({text})LEX";\n\n'
    "}  // namespace dupscope\n",
    encoding="utf-8",
)
