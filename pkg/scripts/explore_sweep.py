"""Dev exploration: find 7-node planar Unsat witnesses under |F|<=4."""
import json, sys, time
import networkx as nx
from failover_lab.graph import Graph
from failover_lab.gadgets import k5, k33
from failover_lab.sweep import candidate_pairs, is_planar_candidate, sweep
from failover_lab.synthesis import replay

K5 = k5().graph
K33 = k33().graph

def atlas7():
    for G in nx.graph_atlas_g():
        if G.number_of_nodes() == 7 and nx.is_connected(G):
            g = Graph(7, [tuple(e) for e in G.edges()])
            if nx.check_planarity(G)[0]:
                yield g

t0 = time.time()
cands = list(atlas7())
print(f"planar connected 7-node graphs: {len(cands)} ({time.time()-t0:.1f}s)", flush=True)

pairs = list(candidate_pairs(cands))
print(f"candidate (g,tgt) pairs after screens: {len(pairs)}", flush=True)

budget = int(sys.argv[1]) if len(sys.argv) > 1 else 150_000
t0 = time.time()
n_unsat = n_inc = n_found = 0
for i, (g, tgt) in enumerate(pairs):
    rep = sweep([(g, tgt)], max_failures=4, budget_per_instance=budget)
    e = rep.entries[0]
    if e.status == 'unsat':
        n_unsat += 1
        ok = replay(rep.witness[2].certificate)
        print(f"[{i}] UNSAT m={g.m} tgt={tgt} nodes={e.search_nodes} replay={ok} edges={sorted(g.edges)}", flush=True)
        if n_unsat >= 3:
            break
    elif e.status == 'inconclusive':
        n_inc += 1
    else:
        n_found += 1
    if i % 25 == 0:
        print(f"[{i}] so far: unsat={n_unsat} found={n_found} inconclusive={n_inc} t={time.time()-t0:.0f}s", flush=True)
print(f"done: unsat={n_unsat} found={n_found} inconclusive={n_inc} t={time.time()-t0:.0f}s", flush=True)
