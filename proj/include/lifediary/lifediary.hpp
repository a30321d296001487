#pragma once

// Umbrella header: joint captioning of lifelogging photo streams.

#include "lifediary/alignment.hpp"
#include "lifediary/decoder.hpp"
#include "lifediary/errors.hpp"
#include "lifediary/io.hpp"
#include "lifediary/joint.hpp"
#include "lifediary/metrics.hpp"
#include "lifediary/pipeline.hpp"
#include "lifediary/predictor.hpp"
#include "lifediary/retrieval.hpp"
#include "lifediary/stemmer.hpp"
#include "lifediary/tokenize.hpp"
#include "lifediary/vocabulary.hpp"
