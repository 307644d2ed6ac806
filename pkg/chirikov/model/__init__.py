from chirikov.torus import LINEAR_PROFILE, SINE_PROFILE
from .shears import ShearModel

MODELS = {"chirikov": LINEAR_PROFILE, "pierrehumbert": SINE_PROFILE}


def get_model(name, amplitude):
    """
    Build the shear model registered under a name.
    :param name: 'chirikov' or 'pierrehumbert'.
    :param amplitude: kick strength K or shear amplitude A.
    :return: ShearModel
    """
    if isinstance(name, ShearModel):
        return name
    try:
        profile = MODELS[name]
    except KeyError:
        raise ValueError("'model' must be one of {0}; '{1}' is not recognized".format(sorted(MODELS), name))
    return ShearModel(name, amplitude, profile=profile)
