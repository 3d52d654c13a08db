// Copyright 2026 The qldlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qld/biclique.hpp"
#include "qld/ensembles.hpp"
#include "qld/lowdeg.hpp"

namespace qld::registry {

// Bad descriptor text; the message names the offending field.
class DescriptorError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// "name:key=value,flag,key=value" (the colon may also be a comma).
struct Descriptor {
    std::string name;
    std::map<std::string, std::string> params;
    std::set<std::string> flags;

    bool has(const std::string &key) const { return params.count(key) > 0; }
    bool flag(const std::string &f) const { return flags.count(f) > 0; }
    int get_int(const std::string &key, int fallback) const;
    int require_int(const std::string &key) const;
    double get_double(const std::string &key, double fallback) const;
    std::string get_string(const std::string &key, const std::string &fallback) const;
    // Rejects keys and flags outside the given lists.
    void expect(const std::vector<std::string> &keys, const std::vector<std::string> &allowed_flags = {}) const;
};

Descriptor parse_descriptor(const std::string &text);

struct EnsembleEntry {
    std::string name;
    std::string schema;
    std::function<ens::StateEnsemble(const Descriptor &)> make;
};

struct PlanEntry {
    std::string name;
    std::string schema;
    // system register, descriptor, stream for randomized plans
    std::function<lowdeg::MeasurementPlan(const QuditRegister &, const Descriptor &, Rng &)> make;
};

void register_ensemble(EnsembleEntry e);
void register_plan(PlanEntry e);

ens::StateEnsemble make_ensemble(const std::string &descriptor);
lowdeg::MeasurementPlan make_plan(const std::string &descriptor, const QuditRegister &system, Rng &rng);
biclique::Detector make_detector(const std::string &descriptor);

std::vector<std::string> ensemble_names();
std::vector<std::string> plan_names();
// One line per descriptor with its parameter schema; an empty filter lists everything.
std::string list_registry(const std::string &filter = "");

}  // namespace qld::registry
