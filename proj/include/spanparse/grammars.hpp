// Copyright 2026 The spanparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPANPARSE_GRAMMARS_HPP_
#define SPANPARSE_GRAMMARS_HPP_

// Built-in copies of data/grammars/*.txt (a unit test keeps them in sync).

#include <string_view>

namespace spanparse {

inline constexpr std::string_view kConversationalGrammar = R"grammar(
# Conversational English stub grammar.
#   start SYMBOL
#   rule WEIGHT LHS -> RHS...
#   lex TAG word...
start S

rule 10 S -> NP VP
rule 2 S -> ADVP NP VP
rule 1 S -> NP ADVP VP
rule 1 S -> S CC S
rule 1 S -> SBAR NP VP
rule 1 S -> CC NP VP

rule 6 NP -> PRP
rule 3 NP -> DT NN
rule 2 NP -> DT JJ NN
rule 1 NP -> DT NNS
rule 1 NP -> DT JJ NNS
rule 2 NP -> NNS
rule 1 NP -> JJ NNS
rule 1 NP -> PRPS NN
rule 1 NP -> NP PP
rule 1 NP -> NNP
rule 1 NP -> CD NNS
rule 1 NP -> DT NN NN

rule 4 VP -> VBP NP
rule 3 VP -> VBD NP
rule 2 VP -> MD VB NP
rule 1 VP -> MD VB
rule 1 VP -> MD VB PP
rule 2 VP -> VBP ADJP
rule 1 VP -> VBD PP
rule 2 VP -> VBP SBAR
rule 1 VP -> VP ADVP
rule 1 VP -> VBP NP PP
rule 1 VP -> VBD NP PP
rule 1 VP -> VBD
rule 1 VP -> AUX RB VB NP

rule 1 PP -> IN NP

rule 3 ADJP -> JJ
rule 1 ADJP -> RB JJ
rule 1 ADJP -> JJ PP

rule 3 ADVP -> RB
rule 1 ADVP -> RB RB

rule 2 SBAR -> CS S
rule 1 SBAR -> S

lex PRP i you we they he she it
lex PRPS my your our their his her
lex DT the a this that some every any
lex NN dog car house job school church family money time kid husband wife friend program
lex NN show game book computer problem week year city town weekend garden movie restaurant
lex NN teacher doctor neighbor phone bill payment vacation weather team class lunch
lex NNS dogs cars houses jobs schools kids people friends programs shows games books computers
lex NNS problems weeks years cities movies restaurants teachers neighbors bills taxes children parents
lex NNP texas dallas boston denver california mexico
lex JJ big small good bad new old nice real different little great hard expensive cheap busy
lex JJ funny long short interesting important
lex VBP like think know have want see need say guess watch play get
lex VBD liked thought knew had wanted saw needed said watched played got went took bought moved
lex VB like have see get watch play buy take do go call pay
lex MD can could would should will might
lex IN in on at for with about from to of
lex CS that because if when
lex RB really pretty very just always never probably actually too still
lex CC and but or so
lex CD two three four five
lex AUX do did
)grammar";

inline constexpr std::string_view kWrittenGrammar = R"grammar(
# Written newswire-style stub grammar, used for out-of-domain unlabeled text.
start S

rule 8 S -> NP VP
rule 1 S -> PP NP VP
rule 1 S -> S CC S

rule 3 NP -> DT NN
rule 2 NP -> DT JJ NN
rule 2 NP -> NNP NNP
rule 1 NP -> NNP
rule 1 NP -> DT NNS
rule 1 NP -> JJ NNS
rule 1 NP -> CD NNS
rule 2 NP -> NP PP
rule 1 NP -> DT NN NN

rule 4 VP -> VBD NP
rule 2 VP -> VBD NP PP
rule 1 VP -> VBD SBAR
rule 1 VP -> MD VB NP
rule 1 VP -> VBZ VBN PP
rule 1 VP -> VBD PP

rule 1 PP -> IN NP
rule 1 SBAR -> CS S

lex DT the a an this its
lex NN company government committee proposal market report agency board plan price decline
lex NN quarter contract bank court official analyst statement investment policy industry
lex NNS shares earnings investors prices officials sales rates securities analysts bonds
lex NNP washington london tokyo congress treasury reuters
lex JJ federal annual financial economic foreign major previous public senior corporate
lex VBD said reported announced approved rose fell expected issued agreed declined
lex VB approve reduce increase remain
lex VBZ has is
lex VBN expected approved reported
lex MD will would may
lex IN in of for by from during after
lex CS that
lex CC and but
lex CD two three million billion
)grammar";

}  // namespace spanparse

#endif  // SPANPARSE_GRAMMARS_HPP_
