from setuptools import setup, find_packages

setup(
    name='pysysid',
    version='0.1.0',
    description='Calibrate simulator physics parameters against observed trajectories',
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"pysysid": ["data/*.bounds"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Topic :: Scientific/Engineering",
    ],
    platforms=["any"],
    python_requires='>=3.8',
    install_requires=[
        "numpy",
        "scipy",
        "scikit-image",
        "opencv-python-headless",
        "httpx",
        "PyYAML",
    ],
    extras_require={
        "tests": ["pytest"],
    },
    entry_points={
        "console_scripts": ["pysysid = pysysid.cli:main"],
    },
)
