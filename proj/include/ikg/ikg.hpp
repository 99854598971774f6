#pragma once

#include "ikg/constraints.hpp"
#include "ikg/errors.hpp"
#include "ikg/eval.hpp"
#include "ikg/graph.hpp"
#include "ikg/image.hpp"
#include "ikg/model_client.hpp"
#include "ikg/persist.hpp"
#include "ikg/pipeline.hpp"
#include "ikg/prompts.hpp"
#include "ikg/schema.hpp"
#include "ikg/schema_induction.hpp"
#include "ikg/util.hpp"
