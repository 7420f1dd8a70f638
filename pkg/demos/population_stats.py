# Statistical quality over a simulated device population: uniformity
# (response balance), uniqueness (inter-device distance on shared
# challenges) and reliability (distance to the enrolled responses;
# decryption errors only, key reconstruction assumed ideal).

from lwepuf.evaluate import PopulationSpec, combined_reliability, run_stats

spec = PopulationSpec(num_devices=100, challenges_per_device=1000, master_seed=0)
report = run_stats(spec)
print(f"{spec.num_devices} devices x {spec.challenges_per_device} challenges")
print(report.as_text())
print("ideal values: uniformity 0.5, uniqueness 0.5, reliability ~ the")
print("decryption error rate; stds follow the 1/sqrt(1000) binomial scale")

combined = combined_reliability(num_devices=10, reads_per_device=20)
print(f"\nreliability including POK noise and key reconstruction: "
      f"{combined:.4f}")
print("(no reference value; with FE failures at ~1e-6 it matches the")
print(" decryption error rate)")
