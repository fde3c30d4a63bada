#pragma once

#include "vdomc/error.hpp"
#include "vdomc/vnode.hpp"
#include "vdomc/vnode_json.hpp"
#include "vdomc/template.hpp"
#include "vdomc/compiler.hpp"
#include "vdomc/runtime.hpp"
#include "vdomc/patch.hpp"
#include "vdomc/diff.hpp"
#include "vdomc/dom.hpp"
#include "vdomc/scheduler.hpp"
#include "vdomc/bench.hpp"
