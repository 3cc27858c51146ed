from selfdual import make_lattice, make_grid, build_pair, energy_internal
from selfdual.landau.groundstate import ThetaParams
from selfdual.solver.kazdan_warner import SolverConfig
import timeit


lattice = make_lattice(1.0, 0.0)
grid = make_grid(lattice, 64)
theta = ThetaParams()
cfg = SolverConfig()
fields = (0.6, 0.5, 0.4, 0.3, 0.2)


# Example usage
def test1():
    for H in fields:
        build_pair.__wrapped__(lattice, grid, theta, H, cfg)


def test2():
    for H in fields:
        build_pair(lattice, grid, theta, H, cfg)


test_times = 5

time1 = timeit.timeit(test1, number=test_times) / test_times
time2 = timeit.timeit(test2, number=test_times) / test_times

print(str(len(fields)) + ' self-dual pairs without caching took ' + str(time1 * 1000) + ' ms')
print(str(len(fields)) + ' self-dual pairs with    caching took ' + str(time2 * 1000) + ' ms')
print(build_pair.cache_info())

pair = build_pair(lattice, grid, theta, 0.3, cfg)
report = energy_internal(pair.u, pair.a, 2 ** -0.5, 0.3)
print('internal energy at H_int = 0.3: ' + str(report.internal))
