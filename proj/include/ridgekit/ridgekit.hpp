#pragma once

#include "ridgekit/cluster.hpp"
#include "ridgekit/error.hpp"
#include "ridgekit/image.hpp"
#include "ridgekit/imaging.hpp"
#include "ridgekit/minutiae.hpp"
#include "ridgekit/orientation.hpp"
#include "ridgekit/parallel.hpp"
#include "ridgekit/pipeline.hpp"
#include "ridgekit/rfpcode.hpp"
#include "ridgekit/search.hpp"
#include "ridgekit/store.hpp"
#include "ridgekit/synth.hpp"
