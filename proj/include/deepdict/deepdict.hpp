#pragma once

#include <deepdict/baseline.hpp>
#include <deepdict/classify.hpp>
#include <deepdict/dataset.hpp>
#include <deepdict/ddlic.hpp>
#include <deepdict/harness/config.hpp>
#include <deepdict/harness/diagnostics.hpp>
#include <deepdict/harness/experiment.hpp>
#include <deepdict/linalg.hpp>
#include <deepdict/model.hpp>
#include <deepdict/model_io.hpp>
