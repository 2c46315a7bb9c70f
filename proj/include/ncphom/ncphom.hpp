#pragma once

#include "ncphom/numerics.hpp"
#include "ncphom/reformulate.hpp"
#include "ncphom/homotopy.hpp"
#include "ncphom/tracer.hpp"
#include "ncphom/problems.hpp"
#include "ncphom/oracle.hpp"
#include "ncphom/io.hpp"
