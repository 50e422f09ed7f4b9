"""
Type-directed random generation of databases, expressions, predicates and
action sets for the differential checks.

Everything is drawn from a ``random.Random`` seeded per case, so a
(seed, case index) pair always reproduces the same input.
"""

import logging
import random
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from models import eb_ast as eb
from models.core import REL_SCHEMA, SET_SCHEMA, Database, Relation, Scalar, ScalarKind
from models.errors import Unsatisfiable
from services.typecheck import TypeEnv

logger = logging.getLogger(__name__)


class GenConfig(BaseModel):
    """Generation bounds for one fuzz run"""

    seed: int = Field(0, description="Base seed; each case derives its own generator from (seed, index)")
    max_depth: int = Field(5, ge=0, description="Maximum expression nesting")
    num_vars: int = Field(4, ge=0, description="Number of machine variables / tables")
    universe_min: int = Field(-4, description="Smallest integer element")
    universe_max: int = Field(4, description="Largest integer element")
    include_bools: bool = Field(True, description="Also draw true/false elements")
    max_set_size: int = Field(6, ge=0, description="Largest table size")
    optimized_weight: float = Field(
        0.6, ge=0.0, le=1.0,
        description="Share of assignments shaped like one of the special-case translation rules"
    )

    @model_validator(mode="after")
    def universe_not_empty(self):
        if self.universe_max < self.universe_min and not self.include_bools:
            raise ValueError("the scalar universe is empty")
        return self

    def kinds(self) -> List[ScalarKind]:
        kinds = []
        if self.universe_min <= self.universe_max:
            kinds.append(ScalarKind.INT)
        if self.include_bools:
            kinds.append(ScalarKind.BOOL)
        return kinds

    def universe(self, kind: ScalarKind) -> List[Scalar]:
        if kind is ScalarKind.BOOL:
            return [Scalar.of(False), Scalar.of(True)] if self.include_bools else []
        return [Scalar.of(i) for i in range(self.universe_min, self.universe_max + 1)]

    def rng(self, index: int) -> random.Random:
        return random.Random(f"{self.seed}:{index}")


def _pick_kind(cfg: GenConfig, rng: random.Random) -> ScalarKind:
    kinds = cfg.kinds()
    if len(kinds) == 2:
        # ints collide more often, so joins and deletes see matches
        return ScalarKind.INT if rng.random() < 0.8 else ScalarKind.BOOL
    return kinds[0]


def _sample(cfg: GenConfig, rng: random.Random, kind: ScalarKind, size: int) -> List[Scalar]:
    pool = cfg.universe(kind)
    return rng.sample(pool, min(size, len(pool)))


def gen_database(cfg: GenConfig, rng: Optional[random.Random] = None) -> Tuple[Database, TypeEnv]:
    """Tables named s0.. (sets) and r0.. (relations) with a matching type environment."""
    rng = rng or cfg.rng(0)
    tables: Dict[str, Relation] = {}
    env: Dict[str, eb.EbType] = {}
    counts = {"s": 0, "r": 0}
    for i in range(cfg.num_vars):
        if i == 0:
            shape = "s"
        elif i == 1:
            shape = "r"
        else:
            shape = rng.choice("sr")
        name = f"{shape}{counts[shape]}"
        counts[shape] += 1
        size = rng.randint(0, cfg.max_set_size)
        if shape == "s":
            kind = _pick_kind(cfg, rng)
            env[name] = eb.TSet(kind)
            tables[name] = Relation.from_values(SET_SCHEMA, [(e,) for e in _sample(cfg, rng, kind, size)])
        else:
            dom, ran = _pick_kind(cfg, rng), _pick_kind(cfg, rng)
            env[name] = eb.TRel(dom, ran)
            pairs = [(x, y) for x in cfg.universe(dom) for y in cfg.universe(ran)]
            tables[name] = Relation.from_values(REL_SCHEMA, rng.sample(pairs, min(size, len(pairs))))
    return Database(tables), env


class ExprGenerator:
    """Draws well-typed terms for one case; every output typechecks against ``env``."""

    def __init__(self, cfg: GenConfig, env: TypeEnv, rng: random.Random):
        self.cfg = cfg
        self.env = env
        self.rng = rng

    def _vars_of(self, want: eb.EbType) -> List[str]:
        return sorted(name for name, t in self.env.items() if t == want)

    def _leaf(self, want: eb.EbType) -> eb.EbExpr:
        names = self._vars_of(want)
        if names and self.rng.random() < 0.75:
            return eb.Var(self.rng.choice(names))
        if isinstance(want, eb.TSet):
            size = self.rng.randint(0, 3)
            return eb.SetLit(tuple(_sample(self.cfg, self.rng, want.elem, size)) if size else ())
        if isinstance(want, eb.TRel):
            doms, rans = self.cfg.universe(want.dom), self.cfg.universe(want.ran)
            if doms and rans:
                size = self.rng.randint(0, 3)
                return eb.RelLit(tuple((self.rng.choice(doms), self.rng.choice(rans)) for _ in range(size)))
            if names:
                return eb.Var(names[0])
            raise Unsatisfiable(want)
        if isinstance(want, eb.TInt):
            return eb.IntLit(self.rng.randint(0, max(1, self.cfg.max_set_size)))
        if isinstance(want, eb.TBool):
            return eb.BoolLit(self.rng.random() < 0.5)
        raise Unsatisfiable(want)

    def _kind(self) -> ScalarKind:
        return _pick_kind(self.cfg, self.rng)

    def _collection_type(self) -> eb.EbType:
        if self.rng.random() < 0.5:
            return eb.TSet(self._kind())
        return eb.TRel(self._kind(), self._kind())

    def expr(self, want: eb.EbType, depth: Optional[int] = None) -> eb.EbExpr:
        depth = self.cfg.max_depth if depth is None else depth
        if depth <= 0 or self.rng.random() < 0.25:
            return self._leaf(want)
        d = depth - 1
        if isinstance(want, eb.TInt):
            return eb.Card(self.expr(self._collection_type(), d))
        if isinstance(want, eb.TSet):
            return self._set(want, d)
        if isinstance(want, eb.TRel):
            return self._rel(want, d)
        return self._leaf(want)

    def _set(self, want: eb.TSet, d: int) -> eb.EbExpr:
        k = want.elem
        choice = self.rng.randrange(6)
        if choice == 0:
            return eb.Union(self.expr(want, d), self.expr(want, d))
        if choice == 1:
            return eb.Inter(self.expr(want, d), self.expr(want, d))
        if choice == 2:
            return eb.SetMinus(self.expr(want, d), self.expr(want, d))
        if choice == 3:
            return eb.Dom(self.expr(eb.TRel(k, self._kind()), d))
        if choice == 4:
            return eb.Ran(self.expr(eb.TRel(self._kind(), k), d))
        other = self._kind()
        return eb.Image(self.expr(eb.TRel(other, k), d), self.expr(eb.TSet(other), d))

    def _rel(self, want: eb.TRel, d: int) -> eb.EbExpr:
        a, b = want.dom, want.ran
        choice = self.rng.randrange(13)
        if choice == 0:
            return eb.Union(self.expr(want, d), self.expr(want, d))
        if choice == 1:
            return eb.Inter(self.expr(want, d), self.expr(want, d))
        if choice == 2:
            return eb.SetMinus(self.expr(want, d), self.expr(want, d))
        if choice == 3:
            return eb.CProd(self.expr(eb.TSet(a), d), self.expr(eb.TSet(b), d))
        if choice == 4:
            return eb.DomRes(self.expr(eb.TSet(a), d), self.expr(want, d))
        if choice == 5:
            return eb.DomSub(self.expr(eb.TSet(a), d), self.expr(want, d))
        if choice == 6:
            return eb.RanRes(self.expr(want, d), self.expr(eb.TSet(b), d))
        if choice == 7:
            return eb.RanSub(self.expr(want, d), self.expr(eb.TSet(b), d))
        c = self._kind()
        if choice == 8:
            return eb.FComp(self.expr(eb.TRel(a, c), d), self.expr(eb.TRel(c, b), d))
        if choice == 9:
            return eb.BComp(self.expr(eb.TRel(c, b), d), self.expr(eb.TRel(a, c), d))
        if choice == 10:
            return eb.Ovl(self.expr(want, d), self.expr(want, d))
        if choice == 11:
            return eb.Inverse(self.expr(eb.TRel(b, a), d))
        return self._leaf(want)

    def pred(self, depth: Optional[int] = None) -> eb.EbPred:
        depth = self.cfg.max_depth if depth is None else depth
        d = max(depth - 1, 0)
        choice = self.rng.randrange(8 if depth > 0 else 5)
        if choice == 0:
            t = self._collection_type()
            return eb.Eq(self.expr(t, d), self.expr(t, d))
        if choice == 1:
            return eb.Eq(self.expr(eb.TInt(), d), self.expr(eb.TInt(), d))
        if choice == 2:
            k = self._kind()
            element = self._leaf(eb.scalar_type(k)) if k is ScalarKind.BOOL else self.expr(eb.TInt(), d)
            if k is ScalarKind.INT and isinstance(element, eb.IntLit):
                element = eb.IntLit(self.rng.choice(self.cfg.universe(k)).value)
            return eb.In(element, self.expr(eb.TSet(k), d))
        if choice in (3, 4):
            t = self._collection_type()
            node = eb.Subset if choice == 3 else eb.SubsetEq
            return node(self.expr(t, d), self.expr(t, d))
        if choice == 5:
            return eb.Not(self.pred(d))
        if choice == 6:
            return eb.And(self.pred(d), self.pred(d))
        return eb.Or(self.pred(d), self.pred(d))

    def program(self) -> eb.EbNode:
        """An expression or predicate for the single-term check"""
        roll = self.rng.random()
        if roll < 0.3:
            return self.pred()
        if roll < 0.4:
            return self.expr(eb.TInt())
        return self.expr(self._collection_type())

    def _optimized(self, target: str, t: eb.EbType, d: int) -> eb.EbExpr:
        me = eb.Var(target)
        if isinstance(t, eb.TSet):
            node = self.rng.choice([eb.Union, eb.SetMinus, eb.Inter])
            return node(me, self.expr(t, d))
        shape = self.rng.randrange(5)
        if shape == 0:
            return eb.Ovl(me, self.expr(t, d))
        if shape in (1, 2):
            node = eb.DomSub if shape == 1 else eb.DomRes
            return node(self.expr(eb.TSet(t.dom), d), me)
        node = eb.RanSub if shape == 3 else eb.RanRes
        return node(me, self.expr(eb.TSet(t.ran), d))

    def actions(self) -> eb.ActionSet:
        candidates = sorted(name for name, t in self.env.items() if isinstance(t, (eb.TSet, eb.TRel)))
        if not candidates:
            raise Unsatisfiable("a set or relation variable to assign")
        count = self.rng.randint(1, min(3, len(candidates)))
        targets = self.rng.sample(candidates, count)
        assignments = []
        for target in targets:
            t = self.env[target]
            d = self.rng.randint(0, max(self.cfg.max_depth - 1, 0))
            if self.rng.random() < self.cfg.optimized_weight:
                rhs = self._optimized(target, t, d)
            else:
                rhs = self.expr(t, d)
            assignments.append(eb.Assignment(target, rhs))
        return eb.ActionSet(tuple(assignments))


def gen_expr(cfg: GenConfig, env: TypeEnv, want: eb.EbType, rng: Optional[random.Random] = None,
             depth: Optional[int] = None) -> eb.EbExpr:
    return ExprGenerator(cfg, env, rng or cfg.rng(0)).expr(want, depth)


def gen_pred(cfg: GenConfig, env: TypeEnv, rng: Optional[random.Random] = None,
             depth: Optional[int] = None) -> eb.EbPred:
    return ExprGenerator(cfg, env, rng or cfg.rng(0)).pred(depth)


def gen_actions(cfg: GenConfig, env: TypeEnv, rng: Optional[random.Random] = None) -> eb.ActionSet:
    return ExprGenerator(cfg, env, rng or cfg.rng(0)).actions()
