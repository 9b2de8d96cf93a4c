#pragma once

// Umbrella header for the seqedit library: training and evaluation of
// non-autoregressive sequence-editing policies via imitation learning,
// with an edit-distance curriculum, a Levenshtein edit oracle, iterative
// refinement inference, and text-editing metrics.

#include "seqedit/corpus.hpp"
#include "seqedit/curriculum.hpp"
#include "seqedit/errors.hpp"
#include "seqedit/levenshtein.hpp"
#include "seqedit/metrics.hpp"
#include "seqedit/noise.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/policy.hpp"
#include "seqedit/refine.hpp"
#include "seqedit/reports.hpp"
#include "seqedit/rng.hpp"
#include "seqedit/rollin.hpp"
#include "seqedit/train.hpp"
#include "seqedit/types.hpp"
#include "seqedit/vocab.hpp"
#include "seqedit/window_scorer.hpp"
