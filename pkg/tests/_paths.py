"""Follow one decision trace through the executor."""
from cpverify.executor import RESULT, TOP, ExploreOptions, Explorer
from cpverify.renaming import expand_quantifiers


def drive(ast, trace, opts=ExploreOptions()):
    """The terminal configuration reached along ``trace`` (tags like ``T4``)."""
    ex = Explorer(ast, opts)
    cfg = ex.initial()
    trace = tuple(trace)
    while cfg.status != TOP:
        nxt = [c for c in ex.step(cfg) if trace[:len(c.trace)] == c.trace]
        assert nxt, f"trace {trace} left at {cfg.trace}"
        cfg = nxt[0]
    assert cfg.trace == trace
    return cfg


def postcondition(ast, cfg):
    env = {"result": RESULT} if ast.returns else None
    return expand_quantifiers(ast.postcondition, cfg.sigma, env)
