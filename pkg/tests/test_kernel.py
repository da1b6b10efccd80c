import pytest

from pursuitsim import _kernel
from pursuitsim.arena import Region
from pursuitsim.engine import run_episode
from pursuitsim.world import HazardField

from conftest import agent, scenario


def greedy_case(size, capture="tag", radius=1.0, n_pred=4, topology="bounded", diagonal=False, prey="random_walk",
                speeds=None, fixed=False):
    speeds = speeds or [1.0] * n_pred
    agents = [agent(i, "predator", (i, 0) if fixed else None, "greedy_pursuit", speeds[i]) for i in range(n_pred)]
    agents.append(agent(n_pred, "prey", (size - 1, size - 1) if fixed else None, prey))
    return scenario(agents, size, size, topology=topology, diagonal=diagonal, capture=capture, radius=radius, t_max=60)


CASES = {
    "tag": greedy_case(5),
    "surround_torus": greedy_case(7, "surround4", topology="toroidal"),
    "diagonal_evasive": greedy_case(6, "surround4", diagonal=True, prey="evasive"),
    "proximity_mixed_speeds": greedy_case(8, "proximity", 2.0, n_pred=3, speeds=[0.5, 1.5, 0.7]),
    "tiny_torus": greedy_case(3, "surround4", topology="toroidal", prey="evasive"),
    "fixed_starts": greedy_case(6, fixed=True, prey="evasive"),
}


class TestKernel:
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_matches_reference_engine(self, name):
        sc = CASES[name]
        assert _kernel.supports(sc)
        seeds = list(range(120))
        fast = _kernel.run_batch_compiled(sc, seeds)
        for seed, f in zip(seeds, fast):
            p = run_episode(sc, seed, engine="python")
            assert (p.outcome, p.event_log) == (f.outcome, f.event_log), seed

    def test_auto_dispatch_equals_python(self):
        sc = CASES["tag"]
        auto, ref = run_episode(sc, 11), run_episode(sc, 11, engine="python")
        assert (auto.outcome, auto.event_log) == (ref.outcome, ref.event_log)

    def test_unsupported_classes(self):
        base = CASES["tag"]
        coop = scenario([agent(i, "predator", None, "cooperative_surround") for i in range(4)] + [agent(4, "prey")])
        hz = scenario([agent(0, "predator", (0, 0)), agent(1, "prey", (4, 4))],
                      hazards=HazardField(barriers=Region.of_cells([(2, 2)])))
        cont = scenario([agent(0, "predator"), agent(1, "prey")], kind="continuous", capture="tag")
        assert _kernel.supports(base)
        for sc in (coop, hz, cont):
            assert not _kernel.supports(sc)
            with pytest.raises(Exception, match="compiled"):
                run_episode(sc, 0, engine="compiled")
