"""Python access to the antcsp library.

Structures, formulas and results use the same JSON shapes as the command-line
tool. Structures may be given as dicts, JSON strings or builtin template names
such as "k3" or "linear2g1".
"""

import json

from . import _antcsp
from ._antcsp import BudgetExceeded, InvalidArgument, ParseError

__all__ = [
    "BudgetExceeded", "InvalidArgument", "ParseError",
    "builtin", "set_budget", "budget_used",
    "solve", "count", "is_robust", "frozen", "reflect", "implied",
    "find_polymorphism", "is_core", "core_retract",
    "establish_consistency", "ant_separator",
    "dimacs_import", "dimacs_export", "gottlob", "reduce_to_3sat",
]

_BUILTINS = ("k2", "k3", "k4", "c5", "loop", "one-in-three", "signed-one-in-three",
             "two-plus", "nsat", "linear")


def _structure(s):
    if isinstance(s, str):
        if s.startswith(_BUILTINS) and not s.lstrip().startswith("{"):
            return _antcsp.builtin(s)
        return s
    return json.dumps(s)


def _formulas(F):
    if F is None:
        return ""
    if isinstance(F, str):
        return F
    return json.dumps(F)


def _load(text):
    return json.loads(text)


def builtin(name):
    return _load(_antcsp.builtin(name))


set_budget = _antcsp.set_budget
budget_used = _antcsp.budget_used


def solve(instance, template):
    """A homomorphism as a list of template elements, or None."""
    return _load(_antcsp.solve(_structure(instance), _structure(template)))


def count(instance, template):
    return _antcsp.count(_structure(instance), _structure(template))


def is_robust(instance, template, k, formulas=None, upto=False, brute=False):
    return _load(_antcsp.is_robust(_structure(instance), _structure(template), k,
                                   _formulas(formulas), upto, brute))


def frozen(instance, template, k, formulas=None):
    return _load(_antcsp.frozen(_structure(instance), _structure(template), k, _formulas(formulas)))


def reflect(instance, template, k, formulas=None, full=False):
    return _load(_antcsp.reflect(_structure(instance), _structure(template), k,
                                 _formulas(formulas), full))


def implied(instance, template):
    return _load(_antcsp.implied(_structure(instance), _structure(template)))


def find_polymorphism(template, identities):
    """Operation tables satisfying e.g. "wnu:3" or "bwpair", or None."""
    return _load(_antcsp.find_polymorphism(_structure(template), identities))


def is_core(template):
    return _antcsp.is_core(_structure(template))


def core_retract(template):
    return _load(_antcsp.core_retract(_structure(template)))


def establish_consistency(instance, template, j):
    return _load(_antcsp.establish_consistency(_structure(instance), _structure(template), j))


def ant_separator(instance, template, k, j, formulas=None):
    """True for accept, False for reject."""
    return _antcsp.ant_separator(_structure(instance), _structure(template), k,
                                 _formulas(formulas), j)


def dimacs_import(text):
    return _load(_antcsp.dimacs_import(text))


def dimacs_export(instance):
    return _antcsp.dimacs_export(_structure(instance))


def gottlob(cnf, k):
    return _load(_antcsp.gottlob(cnf, k))


def reduce_to_3sat(cnf):
    return _load(_antcsp.reduce_to_3sat(cnf))
