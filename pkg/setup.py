from setuptools import find_packages, setup

with open("requirements.txt") as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith(("#", "pytest"))]

setup(
    name="maw",
    version="0.1.0",
    description="Stay detection workflows for mixed GPS and cellular location data",
    packages=find_packages(exclude=["maw.tests", "maw.integration_tests"]),
    python_requires=">=3.10",
    install_requires=requirements,
    entry_points={"console_scripts": ["maw=maw.main:main"]},
)
