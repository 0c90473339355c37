#pragma once

#include "bellineq/errors.hpp"
#include "bellineq/families.hpp"
#include "bellineq/layout.hpp"
#include "bellineq/lhvcore.hpp"
#include "bellineq/multiset.hpp"
#include "bellineq/qcond.hpp"
#include "bellineq/qstate.hpp"
#include "bellineq/sign_function.hpp"
