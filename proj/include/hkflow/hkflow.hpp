#pragma once

#include <hkflow/analytic.hpp>
#include <hkflow/common.hpp>
#include <hkflow/extension.hpp>
#include <hkflow/flow.hpp>
#include <hkflow/geometry.hpp>
#include <hkflow/io.hpp>
#include <hkflow/mesh.hpp>
#include <hkflow/moser.hpp>
#include <hkflow/report.hpp>
#include <hkflow/sobolev.hpp>
#include <hkflow/trajectory.hpp>
