"""
Potential shaping on a tiny MDP, computed exactly
=================================================

Every trajectory of a 3-state, 2-action, 3-step MDP is enumerated, so the
expected policy-gradient update and its variance are exact numbers rather
than Monte-Carlo estimates.
"""

import numpy as np

from barfi import tabular

rng = np.random.default_rng(0)
mdp = tabular.random_mdp(rng, num_states=3, num_actions=2, horizon=3)
theta = rng.normal(size=6)
gamma = 0.9

# A random potential, zero on the absorbing state.
potential = tabular.random_potential(rng, mdp, scale=3.0)
shaped = tabular.shaped_reward(mdp, potential, gamma)

plain = tabular.exact_expected_update(mdp, theta, mdp.r_p, gamma)
with_phi = tabular.exact_expected_update(mdp, theta, shaped, gamma)
print("expected update, r_p   :", np.round(plain, 6))
print("expected update, shaped:", np.round(with_phi, 6))
print("largest difference     : %.2e" % np.max(np.abs(plain - with_phi)))

# Same mean, but the spread of the sample update changes.
print("variance, r_p   : %.4f" % tabular.update_variance(mdp, theta, mdp.r_p, gamma))
print("variance, shaped: %.4f" % tabular.update_variance(mdp, theta, shaped, gamma))

###############################################################################
# A large positive potential always hurts in a one-step problem.  With a
# single decision the shaped reward is ``r_p - Phi(s)``, and once Phi exceeds
# twice the largest reward the variance gap has a fixed sign.

bandit = tabular.TabularMDP(np.ones((2, 2, 2)) / 2, [[1.0, 0.5], [0.2, 0.8]], [0.5, 0.5], 1)
for scale in (0.0, 1.0, 2.5, 5.0):
    phi = scale * np.max(bandit.r_p, axis=1)
    gap = tabular.one_step_variance_gap(bandit, np.zeros(4), phi)
    print("Phi = %.1f x max r_p -> Var(shaped) - Var(r_p) = %+.4f" % (scale, gap))

###############################################################################
# The other direction: a reward built from q-values and visitation ratios,
# used with no discounting at all, reproduces the properly discounted update.

print(tabular.prop2_construct_and_check(mdp, theta, gamma).line())
beta = rng.dirichlet(np.ones(2), size=3)
print(tabular.prop3_construct_and_check(mdp, theta, beta, gamma).line())
