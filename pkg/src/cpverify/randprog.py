"""Random small programs for differential testing against brute force.

Programs use at most three variables: two parameters (a scalar pair, or a
scalar and a two-cell array) and one local that also drives loops. Every
loop is bounded by its counter, so programs always terminate.
"""
from __future__ import annotations

import random

ARITH = ("+", "-", "*", "/")
RELS = ("==", "!=", "<", "<=", ">", ">=")


class _Gen:
    def __init__(self, rng: random.Random, with_array: bool):
        self.rng = rng
        self.array = with_array
        self.scalars = ["a", "c"] if with_array else ["a", "b", "c"]
        self.params = ["a", "t"] if with_array else ["a", "b"]

    def expr(self, depth=2, names=None) -> str:
        rng = self.rng
        names = names or self.scalars
        roll = rng.random()
        if depth <= 0 or roll < 0.35:
            if rng.random() < 0.4:
                return str(rng.randint(-3, 3))
            if self.array and rng.random() < 0.3:
                return f"t[{rng.choice(['0', '1', names[0]])}]"
            return rng.choice(names)
        op = rng.choices(ARITH, weights=(4, 3, 2, 1))[0]
        right = self.expr(depth - 1, names)
        if op == "/" and rng.random() < 0.7:
            right = str(rng.choice([-2, 2, 3]))
        return f"({self.expr(depth - 1, names)} {op} {right})"

    def cond(self, depth=1, names=None) -> str:
        rng = self.rng
        roll = rng.random()
        if depth > 0 and roll < 0.15:
            return f"!({self.cond(depth - 1, names)})"
        if depth > 0 and roll < 0.35:
            op = rng.choice(("&&", "||", "==>"))
            return f"({self.cond(depth - 1, names)} {op} {self.cond(depth - 1, names)})"
        return f"{self.expr(1, names)} {rng.choice(RELS)} {self.expr(1, names)}"

    def stmts(self, n, depth, in_loop) -> list:
        return [line for _ in range(n) for line in self.stmt(depth, in_loop)]

    def stmt(self, depth, in_loop) -> list:
        rng = self.rng
        targets = [x for x in self.scalars if not (in_loop and x == "c")]
        roll = rng.random()
        if depth > 0 and roll < 0.2:
            out = [f"if ({self.cond()}) {{"] + self._indent(self.stmts(rng.randint(1, 2), depth - 1, in_loop))
            if rng.random() < 0.6:
                out += ["} else {"] + self._indent(self.stmts(rng.randint(1, 2), depth - 1, in_loop))
            return out + ["}"]
        if depth > 0 and not in_loop and roll < 0.32:
            body = self.stmts(rng.randint(1, 2), depth - 1, True) + ["c = c + 1;"]
            return ([f"c = {rng.randint(-1, 0)};", f"while (c < {rng.randint(1, 3)}) {{"]
                    + self._indent(body) + ["}"])
        if roll < 0.38:
            return [f"assert {self.cond()};"]
        if roll < 0.43:
            return [f"enforce {self.cond()};"]
        if self.array and roll < 0.55:
            return [f"t[{rng.choice(['0', '1', 'a', 'c'])}] = {self.expr()};"]
        return [f"{rng.choice(targets)} = {self.expr()};"]

    @staticmethod
    def _indent(lines):
        return ["    " + line for line in lines]

    def program(self, name) -> str:
        rng = self.rng
        params = "int a, int[2] t" if self.array else "int a, int b"
        pre = self.cond(1, self.params[:1] if self.array else self.params) if rng.random() < 0.6 else "true"
        post_names = ["result", "a"] if self.array else ["result", "a", "b"]
        post = self.cond(1, post_names)
        body = [f"int c = {self.expr(1, self.scalars[:-1])};"]
        body += self.stmts(rng.randint(1, 4), 2, False)
        body.append(f"return {self.expr()};")
        lines = [f"requires {pre}", f"ensures {post}",
                 f"fn {name}({params}) -> int {{"] + self._indent(body) + ["}"]
        return "\n".join(lines) + "\n"


def random_program(seed: int, with_array=None) -> str:
    """Source text of a random terminating program; same seed, same text."""
    rng = random.Random(seed)
    if with_array is None:
        with_array = rng.random() < 0.25
    return _Gen(rng, with_array).program(f"p{seed}")
