#ifndef ADVTEXT_ADVTEXT_HPP
#define ADVTEXT_ADVTEXT_HPP

#include "advtext/error.hpp"
#include "advtext/text.hpp"
#include "advtext/wordnet.hpp"
#include "advtext/embedding.hpp"
#include "advtext/victim.hpp"
#include "advtext/remote.hpp"
#include "advtext/attack.hpp"
#include "advtext/eval.hpp"
#include "advtext/report.hpp"

#endif  // ADVTEXT_ADVTEXT_HPP
