// Copyright 2026 The dualtype Authors
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

#ifndef DUALTYPE_ERRORS_H
#define DUALTYPE_ERRORS_H

#include <stdexcept>
#include <string>

namespace dualtype {

/// A request that violates a physical or mathematical precondition.
class DomainError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
   public:
    ConvergenceError(const std::string &what, double residual)
        : std::runtime_error(what), residual_(residual) {
    }
    double residual() const {
        return residual_;
    }

   private:
    double residual_;
};

}  // namespace dualtype

#endif
