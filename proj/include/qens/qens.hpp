#pragma once

#include <qens/bounded_minimize.hpp>
#include <qens/classifiers.hpp>
#include <qens/dataset_io.hpp>
#include <qens/dense_oracle.hpp>
#include <qens/encoding.hpp>
#include <qens/ensemble.hpp>
#include <qens/errors.hpp>
#include <qens/experiment.hpp>
#include <qens/layout.hpp>
#include <qens/results.hpp>
#include <qens/selection.hpp>
#include <qens/selftest.hpp>
#include <qens/statevector.hpp>
#include <qens/trainer.hpp>
