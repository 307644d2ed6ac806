'''
  @ Date: 2026/10/19 01:20
'''
import os
import sys
import json

from chirikov.runner import SUBCOMMANDS, ConfigError, load_config, run, suite, exit_code


config = dict()
config["model"] = "chirikov"  # 'pierrehumbert' swaps the vertical profile to A sin(x1 - w2)
config["K"] = 12.566370614359172  # 4 pi, the smallest kick the two-point controller accepts
config["p"] = 0.25  # drift exponent, must lie in (0, 1/2)
config["seed"] = 0
config["out"] = os.path.abspath("results")
config["profile"] = "quick"  # 'full' runs the published sample sizes


def main(subcommand, config_file=None, constants_file=None, verbose=False, **flags):
    """
    Run one subcommand (or 'suite') and exit 0 when every check passes, 1 when one fails, 2 on bad configuration.
    :param config_file: JSON with ExperimentConfig fields; flags given here override it.
    :param constants_file: JSON mapping of the unnamed rate constants, e.g. {"C": 1, "C1": 1}.
    """
    try:
        overrides = dict(config)
        if config_file is not None:
            # the file takes precedence over the module defaults
            overrides = {}
        if constants_file is not None:
            with open(constants_file, "r") as opened_file:
                overrides["constants"] = json.load(opened_file)
        overrides.update(flags)
        if subcommand == "suite":
            profile = overrides.pop("profile", "quick")
            manifest = suite(profile, load_config(config_file, **overrides), verbose=verbose)
        elif subcommand in SUBCOMMANDS:
            manifest = run(subcommand, load_config(config_file, **overrides), verbose=verbose)
        else:
            raise ConfigError("unknown subcommand '{0}'; expected 'suite' or one of {1}".format(
                subcommand, list(SUBCOMMANDS)))
    except (ValueError, IOError) as error:
        print("configuration error: {0}".format(error))
        sys.exit(2)
    print("{0}: {1}".format(subcommand, manifest.status))
    for name, passed in manifest.checks.items():
        print("  {0:<40} {1}".format(name, "pass" if passed else "FAIL"))
    if manifest.error:
        print("  error: {0}".format(manifest.error))
    sys.exit(exit_code(manifest))


if __name__ == '__main__':
    import fire
    fire.Fire(main)
