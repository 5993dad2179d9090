#pragma once

// Generated by tools/gen_lexicon.py from data/lexicon_v1.tsv. Do not edit.

namespace dupscope {

inline constexpr int kLexiconVersion = 1;

inline constexpr const char* kBundledLexicon = R"LEX(# dupscope sentiment lexicon v1: token<TAB>polarity
abuse	-2
afraid	-2
against	-1
agree	1
amazing	3
angry	-2
annoying	-1
attack	-2
attacked	-2
awesome	3
awful	-3
bad	-2
beautiful	2
best	1
better	1
blessed	2
boring	-1
brave	2
brilliant	3
calm	1
celebrate	2
celebrating	2
chaos	-1
concern	-1
congratulations	2
cool	1
corrupt	-2
crisis	-2
cruel	-2
danger	-2
dangerous	-2
disaster	-2
disgusting	-3
enjoy	1
evil	-3
excellent	3
fail	-1
failed	-1
fair	1
fantastic	3
fear	-2
fine	1
friendly	1
glad	2
good	2
great	2
happy	2
hate	-3
hated	-3
hateful	-3
help	1
helpful	1
hero	2
heroes	2
hope	2
hopeful	2
horrible	-3
hurt	-2
injured	-2
insult	-2
insulted	-2
insults	-2
interesting	1
joy	2
kill	-2
killed	-3
kind	2
like	1
liked	1
love	3
loved	3
loving	3
mess	-1
murder	-3
negative	-1
nice	2
ok	1
okay	1
outstanding	3
peaceful	2
poor	-1
positive	1
problem	-1
protest	-2
proud	2
respect	2
riot	-2
riots	-2
sad	-2
safe	2
shame	-2
shameful	-2
smile	1
solidarity	1
stop	-1
superb	3
support	2
tense	-1
terrible	-3
thank	2
thanks	2
threat	-2
unfair	-1
upset	-1
victory	2
violence	-2
violent	-2
welcome	1
well	1
win	2
won	2
wonderful	3
worried	-1
worry	-1
worst	-3
wrong	-1
)LEX";

}  // namespace dupscope
