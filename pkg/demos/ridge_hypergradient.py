"""
Tuning a ridge penalty with implicit gradients
==============================================

The validation loss depends on the penalty only through the trained
weights.  Differentiating the optimality condition of the training problem
gives the hypergradient without unrolling the solver.  Here it is computed
three ways and then used for a few steps of gradient descent on the penalty.
"""

import numpy as np

from barfi import ridge

rng = np.random.default_rng(3)
problem = ridge.random_problem(rng, dim=8, n_train=15, n_val=40, lam=5.0, noise=1.0)

print("closed form        %.8f" % ridge.implicit_lambda_grad(problem))
print("Neumann + FD-HVP   %.8f" % ridge.neumann_lambda_grad(problem))
print("finite differences %.8f" % ridge.finite_difference_lambda_grad(problem))

###############################################################################
# Descend on log(lam) so the penalty stays positive.

log_lam = np.log(problem.lam)
for step in range(15):
    p = problem.with_lam(np.exp(log_lam))
    g = ridge.implicit_lambda_grad(p) * p.lam  # chain rule through exp
    if step % 3 == 0:
        print("step %2d  lam %7.4f  val loss %.4f" % (step, p.lam, p.val_loss(ridge.inner_solve(p))))
    log_lam -= 0.5 * np.sign(g) * min(abs(g), 1.0)
