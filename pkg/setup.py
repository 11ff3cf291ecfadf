import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

with open('./requirements.txt') as f:
    reqs = f.read().strip().split('\n')

setuptools.setup(
    name="lazyforecast",
    version="0.1.0",
    description="Multi-step-ahead forecasting strategies with lazy learning",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    py_modules=['main'],
    python_requires='>=3.8',
    install_requires=reqs,
    entry_points={'console_scripts': ['lazyforecast-bench=main:main']},
)
