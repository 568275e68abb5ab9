# %% [markdown]
# # Error-decay table
#
# The same table the `asymptotics-check` subcommand prints, with fitted
# log-log slopes.  Slope -1 means the O(n^-1/2) term is absent.

# %%
import sys

from hermite_jost import cli

cli.write_rows(cli.asymptotics_rows(), cli.ASYMPTOTIC_COLUMNS, "csv", sys.stdout)
