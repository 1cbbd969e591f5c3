#pragma once

#include "wgstl/engine.hpp"
#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/graph.hpp"
#include "wgstl/io.hpp"
#include "wgstl/model.hpp"
#include "wgstl/model_io.hpp"
#include "wgstl/monitor.hpp"
#include "wgstl/optim.hpp"
#include "wgstl/params.hpp"
#include "wgstl/parser.hpp"
#include "wgstl/preprocess.hpp"
#include "wgstl/random.hpp"
#include "wgstl/report.hpp"
#include "wgstl/soft.hpp"
#include "wgstl/synth.hpp"
#include "wgstl/trainer.hpp"
