#pragma once

// Umbrella header for the debate engine.

#include "parley/backend.hpp"
#include "parley/dataset.hpp"
#include "parley/debate.hpp"
#include "parley/eval.hpp"
#include "parley/experiment.hpp"
#include "parley/http_backend.hpp"
#include "parley/parse.hpp"
#include "parley/prompts.hpp"
#include "parley/replay.hpp"
#include "parley/retrieval.hpp"
#include "parley/retrieval_http.hpp"
#include "parley/types.hpp"
#include "parley/util.hpp"
#include "parley/version.hpp"
