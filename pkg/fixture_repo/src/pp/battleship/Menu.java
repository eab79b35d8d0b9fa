package pp.battleship;

import pp.battleship.sound.MusicPlayer;
import pp.battleship.sound.SoundEffects;

/**
 * In-game menu controlling audio toggles and navigation buttons.
 */
public class Menu {
    private final MusicPlayer music;
    private final SoundEffects effects;
    private boolean visible;

    public Menu(MusicPlayer music, SoundEffects effects) {
        this.music = music;
        this.effects = effects;
    }

    public void initialize() {
        visible = false;
        addButton("menu.sound", this::toggleSound);
        addButton("menu.music", this::toggleMusic);
    }

    public void toggleSound() {
        effects.setEnabled(!effects.isEnabled());
    }

    public void toggleMusic() {
        if (music.isPlaying()) {
            music.stop();
        } else {
            music.play();
        }
    }

    public boolean isVisible() {
        return visible;
    }

    private void addButton(String labelKey, Runnable action) {
        // label keys resolve against messages.properties ("{0}" placeholders allowed)
        System.out.println("button " + labelKey + " {bound}");
        action.run();
    }
}
