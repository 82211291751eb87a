"""Default prompt sets describing the two ends of the quality axis.

Three high-quality and five low-quality descriptions (one per
degradation family). These strings must match the consumer's defaults
byte for byte, because the quality axis is built from their encodings.
"""

HIGH_PROMPTS = (
    "Axial abdominal CT slice with excellent diagnostic quality, sharp "
    "boundaries, clear organ detail, and no visible artifacts.",
    "Diagnostic abdominal CT with clear anatomical structures, low noise, "
    "high contrast, and no streak artifacts.",
    "High-quality CT image with sharp edges, clean appearance, and good "
    "visibility of abdominal organs.",
)

LOW_PROMPTS = (
    "Abdominal CT slice with severe noise and grainy appearance that "
    "reduces visibility of anatomical structures.",
    "Abdominal CT slice with strong blur and significant loss of sharpness.",
    "Abdominal CT slice with strong streak artifacts and reduced "
    "diagnostic quality.",
    "Abdominal CT slice with sparse-view aliasing artifacts and distorted "
    "anatomical structures.",
    "Abdominal CT slice with strong metal artifacts causing bright streaks "
    "and severe image corruption.",
)
