use depthrl_core::agent::{load_model, rollout_greedy, save_model, train};
use depthrl_core::disparity::generate_scene;
use depthrl_core::oracle::grid_search;
use depthrl_core::{AgentConfig, EnvConfig, SceneSpec};

#[test]
fn single_scene_agent_reaches_oracle_ratio() {
    let env = EnvConfig::default();
    let scene = generate_scene(&SceneSpec::default(), 21).unwrap();
    let agent = AgentConfig {
        episodes: 800,
        eps_decay_steps: 3000,
        ..AgentConfig::default()
    };
    let (net, log) = train(std::slice::from_ref(&scene), &env, &agent).unwrap();
    assert_eq!(log.episodes.len(), 800);

    let oracle = grid_search(&scene, &env).unwrap();
    let (traj, adjusted) = rollout_greedy(&net, &scene, &env).unwrap();
    let final_ratio = traj.last().unwrap().next_state.camera.ratio;
    assert!(
        (final_ratio - oracle.best_ratio).abs() <= env.delta + 1e-9,
        "{final_ratio} vs {}",
        oracle.best_ratio
    );
    assert_eq!(adjusted, scene.scale_disparity(final_ratio).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&net, &env, &path).unwrap();
    let back = load_model(&path, &env).unwrap();
    assert_eq!(rollout_greedy(&back, &scene, &env).unwrap().0, traj);
}
