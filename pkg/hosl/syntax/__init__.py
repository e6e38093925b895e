"""프로그램과 단언의 구문"""

from hosl.syntax.nodes import *  # noqa: F401,F403
from hosl.syntax.ops import (  # noqa: F401
    Purity,
    RelDef,
    canonical_key,
    classify,
    contractive_in,
    equal_mod_ac,
    free_vars,
    fresh_name,
    fv,
    rename_apart,
    substitute,
    unfold_mu,
)
from hosl.syntax.parser import (  # noqa: F401
    parse,
    parse_assertion,
    parse_expr,
    parse_judgement,
    parse_program,
)
from hosl.syntax.printer import pretty  # noqa: F401
