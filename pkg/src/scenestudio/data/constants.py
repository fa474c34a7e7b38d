"""Class and attribute vocabularies for desk-scale and full-scale datasets.

The 40-entry transient-attribute list follows the published ordering of the
Transient Attributes dataset's annotation files. That ordering is an
assumption of this package (kept in one place so it can be corrected): the
loaders only require that a dataset's manifest agree with itself.
"""

# Desk-scale vocabulary: small enough to train on one workstation.
DESK_CLASS_NAMES = ("sky", "ground", "tree", "water", "mountain", "building")
DESK_NUM_CLASSES = len(DESK_CLASS_NAMES)

DESK_ATTRIBUTE_NAMES = (
    "night",
    "sunset",
    "clouds",
    "fog",
    "snow",
    "autumn",
    "lush",
    "dry",
)
DESK_NUM_ATTRIBUTES = len(DESK_ATTRIBUTE_NAMES)

DESK_RESOLUTION = 64

# Full-scale constants (ALS18K-format trees).
FULL_NUM_CLASSES = 150
FULL_RESOLUTION = 512

TRANSIENT_ATTRIBUTE_NAMES = (
    "dirty",
    "daylight",
    "night",
    "sunrisesunset",
    "dawndusk",
    "sunny",
    "clouds",
    "fog",
    "storm",
    "snow",
    "warm",
    "cold",
    "busy",
    "beautiful",
    "flowers",
    "spring",
    "summer",
    "autumn",
    "winter",
    "glowing",
    "colorful",
    "dull",
    "rugged",
    "midday",
    "dark",
    "bright",
    "dramatic",
    "boring",
    "stressful",
    "exciting",
    "sentimental",
    "mysterious",
    "soothing",
    "interesting",
    "gloomy",
    "lush",
    "dry",
    "dusty",
    "rain",
    "moist",
)
FULL_NUM_ATTRIBUTES = len(TRANSIENT_ATTRIBUTE_NAMES)

assert FULL_NUM_ATTRIBUTES == 40
